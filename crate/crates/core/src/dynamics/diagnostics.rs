use crate::ancillary::AncillaryFrame;
use crate::error::{Error, Result};
use crate::linalg::{cis, ComplexMatrix, I};
use crate::synthesis::GeneratedPhases;

/// `‖dΠ/dt + i[H, Π]‖_F` at `t`, with `dΠ/dt` by a centered difference of step `h`.
pub fn von_neumann_residual<P, H>(projector: P, hamiltonian: H, t: f64, h: f64) -> Result<f64>
where
    P: Fn(f64) -> Result<ComplexMatrix>,
    H: Fn(f64) -> Result<ComplexMatrix>,
{
    let rate = (&projector(t + h)? - &projector(t - h)?).scale_real(0.5 / h);
    let pi = projector(t)?;
    let comm = hamiltonian(t)?.commutator(&pi)?;
    Ok((&rate + &comm.scale(I)).frobenius_norm())
}

/// `‖dΠ_k/dt + i[H, Π_k]‖_F` using the frame's analytic derivative of base `k`.
pub fn passage_residual(frame: &AncillaryFrame, k: usize, hamiltonian: &ComplexMatrix) -> Result<f64> {
    if k >= frame.len() {
        return Err(Error::OutOfRange(format!("frame has {} bases, asked for {k}", frame.len())));
    }
    let pi = frame.projector(k);
    let comm = hamiltonian.commutator(&pi)?;
    Ok((&frame.projector_rate(k) + &comm.scale(I)).frobenius_norm())
}

/// Geometric `G_kn = i⟨μ_k|μ̇_n⟩` and dynamical `D_kn = ⟨μ_k|H|μ_n⟩` matrices.
pub fn gd_matrices(frame: &AncillaryFrame, hamiltonian: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let k = frame.len();
    let h_mu = (0..k)
        .map(|n| hamiltonian.apply(frame.base(n)))
        .collect::<Result<Vec<_>>>()?;
    let g = ComplexMatrix::from_fn(k, k, |r, c| I * frame.base(r).inner(frame.base_rate(c)));
    let d = ComplexMatrix::from_fn(k, k, |r, c| frame.base(r).inner(&h_mu[c]));
    Ok((g, d))
}

/// `U(t) = Σ_k e^{i f_k(t)} |μ_k(t)⟩⟨μ_k(0)|` at every frame time.
pub fn reconstruct_evolution(frames: &[AncillaryFrame], phases: &GeneratedPhases) -> Result<Vec<ComplexMatrix>> {
    if frames.len() != phases.times.len() {
        return Err(Error::Grid(format!(
            "{} frames but {} phase samples",
            frames.len(),
            phases.times.len()
        )));
    }
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let tol = 1e-9 * (phases.times.last().unwrap() - phases.times[0]).abs().max(1.0);
    frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            if (frame.t - phases.times[i]).abs() > tol {
                return Err(Error::Grid(format!(
                    "frame time {} differs from phase time {}",
                    frame.t, phases.times[i]
                )));
            }
            let f = phases.frame_ordered(i);
            if f.len() != frame.len() {
                return Err(Error::Dimension(format!(
                    "{} phases for a frame of {} bases",
                    f.len(),
                    frame.len()
                )));
            }
            let dim = frame.layout().dim();
            let mut u = ComplexMatrix::zeros(dim, dim);
            for (k, &fk) in f.iter().enumerate() {
                u += &ComplexMatrix::outer(frame.base(k), first.base(k)).scale(cis(fk));
            }
            Ok(u)
        })
        .collect()
}

