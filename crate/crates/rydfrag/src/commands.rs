//! The work behind each subcommand. Every command writes its files under the
//! configured output directory and returns the paths it wrote.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rydfrag_core::basis::BasisState;
use rydfrag_core::counting::counting_table;
use rydfrag_core::fragmentation::enumerate_classes;
use rydfrag_core::lindblad::{build_liouvillian, default_dt, evolve_with, linear_grid};
use rydfrag_core::meanfield::{decay_time, gamma_mf, MeanFieldParams};
use rydfrag_core::operators::{build_pxp_hamiltonian, build_rydberg_hamiltonian};
use rydfrag_core::spectrum::full_spectrum;
use rydfrag_core::{DensityMatrix, IntegratorConfig, LindbladGenerator, MemoryBudget, OperatorMatrix, TimeSeries};

use crate::config::{InitialState, Model, RunConfig};
use crate::error::CliError;
use crate::format::{self, ClassesDocument, MeanFieldRow, SpectrumSummary};

pub const BUDGET_VARIABLE: &str = "RYDFRAG_MEM_BUDGET_MB";

/// Memory budget from `RYDFRAG_MEM_BUDGET_MB`, or the default.
pub fn memory_budget() -> Result<MemoryBudget, CliError> {
    budget_from(std::env::var(BUDGET_VARIABLE).ok().as_deref())
}

pub fn budget_from(value: Option<&str>) -> Result<MemoryBudget, CliError> {
    match value {
        None => Ok(MemoryBudget::default()),
        Some(text) => match text.trim().parse::<u64>() {
            Ok(mb) if mb > 0 => Ok(MemoryBudget::from_megabytes(mb)),
            _ => Err(CliError::BudgetVariable(text.to_string())),
        },
    }
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    write(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn output_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })
}

pub fn hamiltonian(cfg: &RunConfig, budget: MemoryBudget) -> Result<OperatorMatrix, CliError> {
    Ok(match cfg.model {
        Model::Rydberg => build_rydberg_hamiltonian(&cfg.chain, budget)?,
        Model::Dpxp => build_pxp_hamiltonian(cfg.chain.length, cfg.chain.omega, budget)?,
    })
}

fn initial_density(state: InitialState, length: usize) -> DensityMatrix {
    match state {
        InitialState::Basis(s) => DensityMatrix::pure_basis(s),
        InitialState::Mixed => DensityMatrix::maximally_mixed(length),
    }
}

pub fn timeseries_path(cfg: &RunConfig, initial: InitialState) -> PathBuf {
    cfg.out.join(format!("evolve_{}_L{}_{}.csv", cfg.model, cfg.chain.length, initial.label()))
}

/// Integrates the configured initial state, or every basis state when
/// `all_initial_states` is set, and writes one time-series CSV per run.
pub fn cmd_evolve(cfg: &RunConfig, all_initial_states: bool, budget: MemoryBudget) -> Result<Vec<PathBuf>, CliError> {
    let h = hamiltonian(cfg, budget)?;
    let generator = LindbladGenerator::new(&h, cfg.chain.gamma, cfg.chain.length)?;
    let grid = linear_grid(cfg.t_max, cfg.points);
    let integrator = IntegratorConfig::with_dt(cfg.dt.unwrap_or_else(|| default_dt(&cfg.chain)));
    let initial_states: Vec<InitialState> = if all_initial_states {
        BasisState::all(cfg.chain.length)?.map(InitialState::Basis).collect()
    } else {
        vec![cfg.initial]
    };

    let run = |&initial: &InitialState| -> Result<TimeSeries, CliError> {
        let rho0 = initial_density(initial, cfg.chain.length);
        Ok(evolve_with(&generator, &rho0, &grid, &integrator)?)
    };
    let results: Vec<Result<TimeSeries, CliError>> = if cfg.jobs > 1 && initial_states.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?;
        pool.install(|| initial_states.par_iter().map(run).collect())
    } else {
        initial_states.iter().map(run).collect()
    };

    output_dir(&cfg.out)?;
    let mut written = Vec::with_capacity(results.len());
    for (initial, series) in initial_states.iter().zip(results) {
        let series = series?;
        let path = timeseries_path(cfg, *initial);
        write_file(&path, |w| format::write_timeseries(w, &series))?;
        written.push(path);
    }
    Ok(written)
}

/// Diagonalizes the Liouvillian, writes the eigenvalues and a summary file.
pub fn cmd_spectrum(cfg: &RunConfig, budget: MemoryBudget) -> Result<(Vec<PathBuf>, SpectrumSummary), CliError> {
    let h = hamiltonian(cfg, budget)?;
    let liouvillian = build_liouvillian(&h, cfg.chain.gamma, cfg.chain.length, budget)?;
    let spectrum = full_spectrum(&liouvillian)?;
    let summary = SpectrumSummary::new(&spectrum, cfg.chain.gamma);
    output_dir(&cfg.out)?;
    let stem = format!("spectrum_{}_L{}", cfg.model, cfg.chain.length);
    let values = cfg.out.join(format!("{stem}.csv"));
    let summary_path = cfg.out.join(format!("{stem}_summary.csv"));
    write_file(&values, |w| format::write_spectrum(w, &spectrum))?;
    write_file(&summary_path, |w| summary.write_csv(w))?;
    Ok((vec![values, summary_path], summary))
}

pub fn cmd_classes(length: usize, out: &Path) -> Result<PathBuf, CliError> {
    let doc = ClassesDocument::new(length, &enumerate_classes(length)?);
    output_dir(out)?;
    let path = out.join(format!("classes_L{length}.json"));
    write_file(&path, |w| doc.write(w))?;
    Ok(path)
}

pub fn cmd_count(max_length: usize, out: &Path) -> Result<PathBuf, CliError> {
    let max_length = u32::try_from(max_length)
        .map_err(|_| CliError::Field { field: "length", reason: format!("{max_length} is too large") })?;
    let rows = counting_table(max_length)?;
    output_dir(out)?;
    let path = out.join("count.csv");
    write_file(&path, |w| format::write_counts(w, &rows))?;
    Ok(path)
}

pub fn meanfield_rows(omega: f64, v: f64, q: f64, gammas: &[f64]) -> Result<Vec<MeanFieldRow>, CliError> {
    gammas
        .iter()
        .map(|&gamma| {
            let params = MeanFieldParams { omega, gamma, v, q };
            Ok(MeanFieldRow { gamma, gamma_mf: gamma_mf(&params)?, tau: decay_time(&params)? })
        })
        .collect()
}

pub fn cmd_meanfield(omega: f64, v: f64, q: f64, gammas: &[f64], out: &Path) -> Result<PathBuf, CliError> {
    let rows = meanfield_rows(omega, v, q, gammas)?;
    output_dir(out)?;
    let path = out.join("meanfield.csv");
    write_file(&path, |w| format::write_meanfield(w, &rows))?;
    Ok(path)
}
