//! Orthonormal ancillary frames for `M+N` two-subspace systems.
//!
//! The frame is built by a cascade of SU(2) rotations. In the assistant
//! subspace each step mixes the previous bright state with the next level
//! `|e_{m+1}⟩`; the working subspace does the same with `|n+1⟩`; a final
//! rotation by the mixing angle φ couples the two terminal bright states.
//! Every vector carries its time derivative, propagated through the cascade by
//! the chain rule.
//!
//! Levels are indexed with the assistant block first: `|e_m⟩ ↦ m` and
//! `|n⟩ ↦ M + n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cis, gram, Complex64, ComplexMatrix, StateVector, I};
use crate::schedules::{ScheduleSet, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubspaceLayout {
    assistant: usize,
    working: usize,
}

impl SubspaceLayout {
    /// `M ≥ 1` assistant and `N ≥ 1` working levels with `M + N ≥ 2`.
    pub fn new(assistant: usize, working: usize) -> Result<Self> {
        if assistant == 0 || working == 0 {
            return Err(Error::Layout(format!(
                "need at least one level per subspace, got M={assistant}, N={working}"
            )));
        }
        Ok(Self { assistant, working })
    }

    #[inline]
    pub fn assistant_levels(&self) -> usize {
        self.assistant
    }

    #[inline]
    pub fn working_levels(&self) -> usize {
        self.working
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.assistant + self.working
    }

    /// Index of `|e_m⟩`.
    pub fn assistant_index(&self, m: usize) -> usize {
        assert!(m < self.assistant, "assistant level {m} out of range");
        m
    }

    /// Index of `|n⟩`.
    pub fn working_index(&self, n: usize) -> usize {
        assert!(n < self.working, "working level {n} out of range");
        self.assistant + n
    }

    pub fn is_assistant(&self, index: usize) -> bool {
        index < self.assistant
    }

    pub fn label(&self, index: usize) -> String {
        if index < self.assistant {
            format!("e{index}")
        } else {
            format!("{}", index - self.assistant)
        }
    }

    /// Frame position of `|μ̃_m⟩`.
    pub fn assistant_base(&self, m: usize) -> usize {
        assert!(m + 1 < self.assistant, "no assistant base {m}");
        m
    }

    /// Frame position of `|μ_n⟩` for `n ≤ N`.
    pub fn working_base(&self, n: usize) -> usize {
        assert!(n <= self.working, "no working base {n}");
        self.assistant - 1 + n
    }

    /// Frame position of `|μ_{N−1}⟩`.
    pub fn lower_passage(&self) -> usize {
        self.dim() - 2
    }

    /// Frame position of `|μ_N⟩`.
    pub fn upper_passage(&self) -> usize {
        self.dim() - 1
    }

    fn check_schedules(&self, schedules: &ScheduleSet) -> Result<()> {
        if schedules.assistant_levels() != self.assistant || schedules.working_levels() != self.working {
            return Err(Error::Layout(format!(
                "schedules declared for {}+{} but layout is {}+{}",
                schedules.assistant_levels(),
                schedules.working_levels(),
                self.assistant,
                self.working
            )));
        }
        Ok(())
    }
}

/// A vector and its time derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moving {
    pub value: StateVector,
    pub rate: StateVector,
}

impl Moving {
    fn fixed(value: StateVector) -> Self {
        let rate = StateVector::zeros(value.dim());
        Self { value, rate }
    }

    /// `p·x + q·y` with coefficients given as (value, derivative).
    fn mix(p: (Complex64, Complex64), x: &Moving, q: (Complex64, Complex64), y: &Moving) -> Self {
        let value = x.value.combine(p.0, &y.value, q.0);
        let rate = x
            .rate
            .combine(p.0, &y.rate, q.0)
            .add(&x.value.combine(p.1, &y.value, q.1));
        Self { value, rate }
    }
}

/// Coefficient `scale·e^{−iα}` with its derivative.
fn phased(scale: f64, scale_rate: f64, alpha: f64, alpha_rate: f64) -> (Complex64, Complex64) {
    let e = cis(-alpha);
    let v = e * scale;
    (v, e * scale_rate - I * alpha_rate * v)
}

fn real(v: f64, d: f64) -> (Complex64, Complex64) {
    (Complex64::new(v, 0.0), Complex64::new(d, 0.0))
}

/// The ancillary frame at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncillaryFrame {
    pub t: f64,
    layout: SubspaceLayout,
    /// `μ̃_0 … μ̃_{M−2}, μ_0 … μ_{N−2}, μ_{N−1}, μ_N`.
    bases: Vec<Moving>,
    /// `b̃_{−1} = |e_0⟩, b̃_0 … b̃_{M−2}`.
    assistant_bright: Vec<Moving>,
    /// `b_{−1} = |0⟩, b_0 … b_{N−2}`.
    working_bright: Vec<Moving>,
}

impl AncillaryFrame {
    pub fn layout(&self) -> SubspaceLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn base(&self, k: usize) -> &StateVector {
        &self.bases[k].value
    }

    pub fn base_rate(&self, k: usize) -> &StateVector {
        &self.bases[k].rate
    }

    pub fn bases(&self) -> impl Iterator<Item = &StateVector> {
        self.bases.iter().map(|b| &b.value)
    }

    pub fn base_vectors(&self) -> Vec<StateVector> {
        self.bases().cloned().collect()
    }

    /// `|b̃_m⟩` for `m ∈ {−1, …, M−2}`; index `-1` is `|e_0⟩`.
    pub fn assistant_bright(&self, m: isize) -> &Moving {
        &self.assistant_bright[(m + 1) as usize]
    }

    /// `|b_n⟩` for `n ∈ {−1, …, N−2}`; index `-1` is `|0⟩`.
    pub fn working_bright(&self, n: isize) -> &Moving {
        &self.working_bright[(n + 1) as usize]
    }

    /// `|b̃_{M−2}⟩`, the assistant state the drive couples to.
    pub fn terminal_assistant(&self) -> &Moving {
        self.assistant_bright.last().expect("non-empty cascade")
    }

    /// `|b_{N−2}⟩`, the working state the drive couples to.
    pub fn terminal_working(&self) -> &Moving {
        self.working_bright.last().expect("non-empty cascade")
    }

    pub fn projector(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::projector(&self.bases[k].value)
    }

    /// `|μ̇_k⟩⟨μ_k| + |μ_k⟩⟨μ̇_k|`.
    pub fn projector_rate(&self, k: usize) -> ComplexMatrix {
        let b = &self.bases[k];
        let a = ComplexMatrix::outer(&b.rate, &b.value);
        &a + &a.adjoint()
    }

    pub fn gram(&self) -> ComplexMatrix {
        gram(&self.base_vectors())
    }

    /// Largest entry of `|Gram − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        (&self.gram() - &ComplexMatrix::identity(self.len())).max_abs()
    }

    /// Largest entry of `|Σ_k |μ_k⟩⟨μ_k| − I|`.
    pub fn completeness_defect(&self) -> f64 {
        crate::linalg::completeness_defect(&self.base_vectors())
    }

    /// Bases as a flat array, one base after another.
    pub fn to_flat(&self) -> Vec<Complex64> {
        self.bases
            .iter()
            .flat_map(|b| b.value.amplitudes().iter().copied())
            .collect()
    }
}

/// Evaluates the full frame at `t`.
pub fn build_frame(layout: SubspaceLayout, schedules: &ScheduleSet, t: f64) -> Result<AncillaryFrame> {
    layout.check_schedules(schedules)?;
    let (m_levels, n_levels) = (layout.assistant, layout.working);
    let dim = layout.dim();
    let level = |i: usize| Moving::fixed(StateVector::basis(dim, i));

    let mut bases = Vec::with_capacity(dim);

    let mut assistant_bright = vec![level(layout.assistant_index(0))];
    for m in 0..m_levels - 1 {
        let (th, thd) = schedules.eval(Symbol::ThetaTilde(m), t)?;
        let (al, ald) = schedules.eval(Symbol::AlphaTilde(m), t)?;
        let (s, c) = th.sin_cos();
        let prev = assistant_bright.last().unwrap();
        let next = level(layout.assistant_index(m + 1));
        bases.push(Moving::mix(real(s, c * thd), prev, phased(c, -s * thd, al, ald), &next));
        let bright = Moving::mix(real(c, -s * thd), prev, phased(-s, -c * thd, al, ald), &next);
        assistant_bright.push(bright);
    }

    let mut working_bright = vec![level(layout.working_index(0))];
    for n in 0..n_levels - 1 {
        let (th, thd) = schedules.eval(Symbol::Theta(n), t)?;
        let (al, ald) = schedules.eval(Symbol::Alpha(n), t)?;
        let (s, c) = th.sin_cos();
        let prev = working_bright.last().unwrap();
        let next = level(layout.working_index(n + 1));
        bases.push(Moving::mix(real(c, -s * thd), prev, phased(-s, -c * thd, al, ald), &next));
        let bright = Moving::mix(real(s, c * thd), prev, phased(c, -s * thd, al, ald), &next);
        working_bright.push(bright);
    }

    let (phi, phid) = schedules.eval(Symbol::Mixing, t)?;
    let (al, ald) = schedules.eval(Symbol::RelativePhase, t)?;
    let (s, c) = phi.sin_cos();
    let w = working_bright.last().unwrap();
    let a = assistant_bright.last().unwrap();
    bases.push(Moving::mix(real(c, -s * phid), w, phased(-s, -c * phid, al, ald), a));
    bases.push(Moving::mix(real(s, c * phid), w, phased(c, -s * phid, al, ald), a));

    Ok(AncillaryFrame {
        t,
        layout,
        bases,
        assistant_bright,
        working_bright,
    })
}

/// Largest 2-norm gap between the analytic base derivatives at `t` and a
/// centered difference of the bases with step `h`.
pub fn frame_derivative_check(
    layout: SubspaceLayout,
    schedules: &ScheduleSet,
    t: f64,
    h: f64,
) -> Result<f64> {
    let mid = build_frame(layout, schedules, t)?;
    let plus = build_frame(layout, schedules, t + h)?;
    let minus = build_frame(layout, schedules, t - h)?;
    let scale = Complex64::new(1.0 / (2.0 * h), 0.0);
    let err = (0..mid.len())
        .map(|k| {
            let fd = plus.base(k).sub(minus.base(k)).scale(scale);
            fd.sub(mid.base_rate(k)).norm()
        })
        .fold(0.0, f64::max);
    Ok(err)
}

/// `⟨e_m|b̃_{M−2}⟩` and `⟨b_{N−2}|n⟩` at `t`, the couplings of the terminal bright states.
pub(crate) fn terminal_components(frame: &AncillaryFrame) -> (Vec<Complex64>, Vec<Complex64>) {
    let layout = frame.layout;
    let a = frame.terminal_assistant().value.amplitudes();
    let w = frame.terminal_working().value.amplitudes();
    let assistant = (0..layout.assistant).map(|m| a[layout.assistant_index(m)]).collect();
    let working = (0..layout.working)
        .map(|n| w[layout.working_index(n)].conj())
        .collect();
    (assistant, working)
}
