//! Browser demo bindings for the interference simulator. Each operation
//! returns a JSON string so the page can stay framework-free.
//!
//! The core logic lives in [`api`] as plain Rust so it can be tested on
//! native targets; the `wasm_bindgen` exports are wasm32-only wrappers.
//! No thread pool is used, so a single-threaded wasm runtime suffices.

pub mod api {
    use blindwit::composite::{
        build_total_hamiltonian, initial_composite_state, standard_witness_layout, WitnessSpec,
    };
    use blindwit::device::{build_device_hamiltonian, build_geometry};
    use blindwit::evolve::{default_packet, Propagator, StateVector};
    use blindwit::observables::{
        normalized_output, p_out, site_probabilities, visibility, witness_report,
    };
    use blindwit::{TotalHamiltonian, TAU, T_FINAL_OVER_TAU};

    type ApiResult = Result<String, String>;

    fn system(
        flux: f64,
        n_wit: usize,
        e_int: f64,
    ) -> Result<(TotalHamiltonian, StateVector), String> {
        let geom = build_geometry();
        let dev = build_device_hamiltonian(&geom, 1.0, flux).map_err(|e| e.to_string())?;
        let wits: Vec<_> = standard_witness_layout(n_wit)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|p| WitnessSpec::blind(p, e_int))
            .collect();
        let h = build_total_hamiltonian(dev, wits).map_err(|e| e.to_string())?;
        let psi0 = initial_composite_state(&default_packet(&geom), &h.witnesses, None)
            .map_err(|e| e.to_string())?;
        Ok((h, psi0))
    }

    fn propagator(h: &TotalHamiltonian) -> Result<Propagator, String> {
        Propagator::auto(h).map_err(|e| e.to_string())
    }

    /// dP_norm(flux) over `points` flux values in [-1, 1], plus the visibility.
    pub fn flux_sweep(n_wit: usize, e_int: f64, points: usize) -> ApiResult {
        if points < 3 {
            return Err("need at least 3 flux points".into());
        }
        let t_f = T_FINAL_OVER_TAU * TAU;
        let mut sweep = Vec::with_capacity(points);
        for i in 0..points {
            let flux = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            let (h, psi0) = system(flux, n_wit, e_int)?;
            let psi = propagator(&h)?
                .evolve(&psi0, t_f)
                .map_err(|e| e.to_string())?;
            sweep.push((flux, p_out(&psi)));
        }
        let normalized = normalized_output(&sweep).map_err(|e| e.to_string())?;
        let vis = visibility(&sweep).ok();
        let out = serde_json::json!({
            "flux": sweep.iter().map(|&(f, _)| f).collect::<Vec<_>>(),
            "p_out": sweep.iter().map(|&(_, p)| p).collect::<Vec<_>>(),
            "dp_norm": normalized.iter().map(|&(_, d)| d).collect::<Vec<_>>(),
            "visibility": vis,
        });
        Ok(out.to_string())
    }

    /// Site probabilities at time `t_over_tau`, with site coordinates.
    pub fn snapshot(n_wit: usize, e_int: f64, flux: f64, t_over_tau: f64) -> ApiResult {
        let (h, psi0) = system(flux, n_wit, e_int)?;
        let psi = propagator(&h)?
            .evolve(&psi0, t_over_tau * TAU)
            .map_err(|e| e.to_string())?;
        let field = site_probabilities(&psi);
        let geom = build_geometry();
        let out = serde_json::json!({
            "x": geom.positions.iter().map(|&(x, _)| x).collect::<Vec<_>>(),
            "y": geom.positions.iter().map(|&(_, y)| y).collect::<Vec<_>>(),
            "prob": field.p,
            "time_over_tau": t_over_tau,
        });
        Ok(out.to_string())
    }

    /// Witness phase angles, witness entropies and device entropy over
    /// `samples` times in [0, t_max_over_tau].
    pub fn witness_dynamics(
        n_wit: usize,
        e_int: f64,
        flux: f64,
        t_max_over_tau: f64,
        samples: usize,
    ) -> ApiResult {
        if samples < 2 {
            return Err("need at least 2 time samples".into());
        }
        if n_wit == 0 {
            return Err("witness dynamics needs at least one witness".into());
        }
        let (h, psi0) = system(flux, n_wit, e_int)?;
        let prop = propagator(&h)?;
        let mut times = Vec::with_capacity(samples);
        let mut theta = vec![Vec::with_capacity(samples); n_wit];
        let mut entropy = vec![Vec::with_capacity(samples); n_wit];
        let mut s_dev = Vec::with_capacity(samples);
        for i in 0..samples {
            let t_tau = t_max_over_tau * i as f64 / (samples - 1) as f64;
            let psi = prop.evolve(&psi0, t_tau * TAU).map_err(|e| e.to_string())?;
            let report = witness_report(&psi, &h.witnesses).map_err(|e| e.to_string())?;
            times.push(t_tau);
            for m in 0..n_wit {
                theta[m].push(report.theta[m]);
                entropy[m].push(report.entropy[m]);
            }
            s_dev.push(report.device_entropy);
        }
        let labels: Vec<String> = h.witnesses.iter().map(|w| w.position.to_string()).collect();
        let out = serde_json::json!({
            "time_over_tau": times,
            "labels": labels,
            "theta": theta,
            "entropy": entropy,
            "device_entropy": s_dev,
        });
        Ok(out.to_string())
    }
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
        r.map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn flux_sweep(n_wit: usize, e_int: f64, points: usize) -> Result<String, JsValue> {
        to_js(crate::api::flux_sweep(n_wit, e_int, points))
    }

    #[wasm_bindgen]
    pub fn snapshot(
        n_wit: usize,
        e_int: f64,
        flux: f64,
        t_over_tau: f64,
    ) -> Result<String, JsValue> {
        to_js(crate::api::snapshot(n_wit, e_int, flux, t_over_tau))
    }

    #[wasm_bindgen]
    pub fn witness_dynamics(
        n_wit: usize,
        e_int: f64,
        flux: f64,
        t_max_over_tau: f64,
        samples: usize,
    ) -> Result<String, JsValue> {
        to_js(crate::api::witness_dynamics(
            n_wit,
            e_int,
            flux,
            t_max_over_tau,
            samples,
        ))
    }
}
