//! Self-check suite behind the `validate` CLI verb: runs the numerical
//! invariants of the model at their stated tolerances.

use crate::composite::{
    build_total_hamiltonian, initial_composite_state, standard_witness_layout, TotalHamiltonian,
    WitnessSpec,
};
use crate::device::{build_device_hamiltonian, build_geometry};
use crate::error::{Error, Result};
use crate::evolve::{
    default_packet, layered_evolve_equivalence_check, Propagator, StateVector,
};
use crate::observables::{
    binary_entropy, p_out, site_probabilities, witness_bloch, witness_report,
    witness_site_occupancy,
};
use crate::{TAU, T_FINAL_OVER_TAU};

/// Outcome of one named invariant check.
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<()>,
}

fn fail(msg: String) -> Result<()> {
    Err(Error::InvariantViolation(msg))
}

fn system(flux: f64, n_wit: usize, e_int: f64) -> Result<(TotalHamiltonian, StateVector)> {
    let geom = build_geometry();
    let dev = build_device_hamiltonian(&geom, 1.0, flux)?;
    let wits: Vec<_> = standard_witness_layout(n_wit)?
        .into_iter()
        .map(|p| WitnessSpec::blind(p, e_int))
        .collect();
    let h = build_total_hamiltonian(dev, wits)?;
    let psi0 = initial_composite_state(&default_packet(&geom), &h.witnesses, None)?;
    Ok((h, psi0))
}

fn check_hermiticity() -> Result<()> {
    let geom = build_geometry();
    for i in 0..25 {
        let flux = -2.0 + 4.0 * i as f64 / 24.0;
        let h = build_device_hamiltonian(&geom, 1.0, flux)?;
        let dev = (&h.matrix - h.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 {
            return fail(format!("Hermiticity deviation {dev:e} at flux {flux}"));
        }
    }
    Ok(())
}

fn check_unitarity() -> Result<()> {
    let (h, psi0) = system(0.3, 2, 5.0)?;
    let prop = Propagator::layered(&h)?;
    for i in 0..40 {
        let t = i as f64 * 0.2 * TAU;
        let norm = prop.evolve(&psi0, t)?.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return fail(format!("norm {norm} at t = {} tau", t / TAU));
        }
    }
    Ok(())
}

fn check_composition() -> Result<()> {
    let (h, psi0) = system(0.41, 2, 5.0)?;
    let prop = Propagator::dense(&h)?;
    let step = prop.evolve(&prop.evolve(&psi0, 1.3 * TAU)?, 2.1 * TAU)?;
    let direct = prop.evolve(&psi0, 3.4 * TAU)?;
    let dev = (&step.amplitudes - &direct.amplitudes)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > 1e-10 {
        return fail(format!("composition deviation {dev:e}"));
    }
    let back = prop.evolve(&prop.evolve(&psi0, 2.0 * TAU)?, -2.0 * TAU)?;
    let dev = (&back.amplitudes - &psi0.amplitudes)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > 1e-10 {
        return fail(format!("reversibility deviation {dev:e}"));
    }
    Ok(())
}

fn check_energy_conservation() -> Result<()> {
    let (h, psi0) = system(0.25, 2, 5.0)?;
    let dense = h.dense_matrix();
    let prop = Propagator::dense(&h)?;
    let e0 = (psi0.amplitudes.adjoint() * &dense * &psi0.amplitudes)[(0, 0)].re;
    for t_tau in [1.0, 3.0, T_FINAL_OVER_TAU] {
        let psi = prop.evolve(&psi0, t_tau * TAU)?;
        let e = (psi.amplitudes.adjoint() * &dense * &psi.amplitudes)[(0, 0)].re;
        if (e - e0).abs() > 1e-10 {
            return fail(format!("energy drift {:e} at t = {t_tau} tau", e - e0));
        }
    }
    Ok(())
}

fn check_layered_equivalence() -> Result<()> {
    let (h, psi0) = system(0.2, 2, 5.0)?;
    let dev = layered_evolve_equivalence_check(
        &h,
        &psi0,
        &[TAU, 3.0 * TAU, T_FINAL_OVER_TAU * TAU],
    )?;
    if dev > 1e-10 {
        return fail(format!("layered vs dense deviation {dev:e}"));
    }
    Ok(())
}

fn check_lambda_z_and_occupancy() -> Result<()> {
    let (h, psi0) = system(0.5, 4, 5.0)?;
    let prop = Propagator::layered(&h)?;
    for t_tau in [0.0, 1.0, 2.5, T_FINAL_OVER_TAU] {
        let psi = prop.evolve(&psi0, t_tau * TAU)?;
        for m in 0..4 {
            let b = witness_bloch(&psi, m)?;
            if b.z.abs() > 1e-10 {
                return fail(format!("lambda_z = {:e} for witness {m}", b.z));
            }
            let (pa, pb) = witness_site_occupancy(&psi, m)?;
            if (pa - 0.5).abs() > 1e-10 || (pb - 0.5).abs() > 1e-10 {
                return fail(format!("occupancy ({pa}, {pb}) for witness {m}"));
            }
        }
    }
    Ok(())
}

fn check_flux_periodicity() -> Result<()> {
    let t_f = T_FINAL_OVER_TAU * TAU;
    for base in [0.0, 0.2, 0.37] {
        let mut p = Vec::new();
        for flux in [base, base + 1.0, base - 1.0] {
            let (h, psi0) = system(flux, 0, 0.0)?;
            let prop = Propagator::dense(&h)?;
            p.push(p_out(&prop.evolve(&psi0, t_f)?));
        }
        if (p[0] - p[1]).abs() > 1e-10 || (p[0] - p[2]).abs() > 1e-10 {
            return fail(format!("P_out not periodic at flux {base}: {p:?}"));
        }
    }
    Ok(())
}

fn check_entropy_bloch_consistency() -> Result<()> {
    let (h, psi0) = system(0.5, 2, 5.0)?;
    let prop = Propagator::layered(&h)?;
    let psi = prop.evolve(&psi0, T_FINAL_OVER_TAU * TAU)?;
    let report = witness_report(&psi, &h.witnesses)?;
    for m in 0..2 {
        let expected = binary_entropy(0.5 * (1.0 + report.bloch[m].length()));
        if (report.entropy[m] - expected).abs() > 1e-9 {
            return fail(format!(
                "S_{m} = {} but binary entropy gives {expected}",
                report.entropy[m]
            ));
        }
    }
    Ok(())
}

fn check_probability_conservation() -> Result<()> {
    let (h, psi0) = system(0.5, 2, 5.0)?;
    let prop = Propagator::layered(&h)?;
    for i in 0..20 {
        let psi = prop.evolve(&psi0, i as f64 * 0.3 * TAU)?;
        let total: f64 = site_probabilities(&psi).p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return fail(format!("site probabilities sum to {total}"));
        }
    }
    Ok(())
}

fn check_destructive_zero() -> Result<()> {
    let (h, psi0) = system(0.5, 0, 0.0)?;
    let prop = Propagator::dense(&h)?;
    let p = p_out(&prop.evolve(&psi0, T_FINAL_OVER_TAU * TAU)?);
    if p > 1e-10 {
        return fail(format!("P_out at half flux = {p:e}"));
    }
    Ok(())
}

/// Run every invariant check, returning one outcome per check.
pub fn run_all() -> Vec<CheckOutcome> {
    let checks: Vec<(&'static str, fn() -> Result<()>)> = vec![
        ("hermiticity", check_hermiticity),
        ("unitarity", check_unitarity),
        ("composition_reversibility", check_composition),
        ("energy_conservation", check_energy_conservation),
        ("layered_dense_equivalence", check_layered_equivalence),
        ("lambda_z_and_occupancy", check_lambda_z_and_occupancy),
        ("flux_periodicity", check_flux_periodicity),
        ("entropy_bloch_consistency", check_entropy_bloch_consistency),
        ("probability_conservation", check_probability_conservation),
        ("destructive_zero_half_flux", check_destructive_zero),
    ];
    checks
        .into_iter()
        .map(|(name, f)| CheckOutcome { name, result: f() })
        .collect()
}
