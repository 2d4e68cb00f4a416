use super::{init_rng, optimize, stiefel};
use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Artifacts, Summary};
use qriopt_core::mera::{
    low_energy_spectrum, tfi_exact_gs_energy_per_site, tfi_ground_energy_per_site, MeraGraph, MeraLayout, MeraObjective,
    MeraParams,
};
use qriopt_core::optim::fmt_f64;
use std::fmt::Write as _;

/// Eigenvalues of the top Hamiltonian reported in gap mode.
const SPECTRUM_LEVELS: usize = 4;

pub fn run_mera(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let n_sites = 2 * 3usize.pow(config.layers as u32);
    let layout = MeraLayout::new(n_sites, config.chi_max)?;
    let objective = if config.gap_mode { MeraObjective::Trace } else { MeraObjective::Energy };
    let problem = MeraGraph::new(&layout, config.hx, objective, stiefel(config))?;
    let params = MeraParams::initial(&layout, !config.gap_mode, &mut init_rng(config))?;
    let mut points = params.into_points();
    let (trace, wall) = optimize(config, &problem, &mut points, |_, _| {})?;

    if config.gap_mode {
        let params = MeraParams::from_points(&layout, &points)?;
        let top = layout.top_dim();
        let spectrum = low_energy_spectrum(&params, config.hx, SPECTRUM_LEVELS.min(top * top))?;
        let mut summary = Summary::new(config, &trace, None, wall)
            .metric("n_sites", n_sites)
            .metric("ground_energy", spectrum[0])
            .metric("energy_gap", spectrum[1] - spectrum[0]);
        summary.converged = true;
        let mut csv = String::from("level,energy\n");
        for (i, e) in spectrum.iter().enumerate() {
            let _ = writeln!(csv, "{i},{}", fmt_f64(*e));
        }
        let mut out = Artifacts::new(trace, summary);
        out.files.push(("spectrum.csv".into(), csv));
        return Ok(out);
    }

    let exact = if config.hx == 1.0 {
        tfi_exact_gs_energy_per_site(n_sites)
    } else {
        tfi_ground_energy_per_site(n_sites, config.hx)
    };
    let mut summary = Summary::new(config, &trace, Some(exact), wall).metric("n_sites", n_sites);
    let rel = summary.gap.unwrap_or(f64::NAN) / exact.abs();
    summary.converged = rel <= 5e-3;
    Ok(Artifacts::new(trace, summary.metric("relative_error", rel)))
}
