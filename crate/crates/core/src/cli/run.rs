use clap::ValueEnum;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::{verify, Cell, RunOutput, Table};
use crate::error::Result;
use crate::evolution::{build_frequencies, evolution_matrix, fidelity_vs_oracle, unitarity_defect};
use crate::inversion::{inversion_expectation, Inversion};
use crate::linalg::{sigma3, Region};
use crate::par::{self, Execution};
use crate::spectrum::dressed_pairs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Spectrum,
    Evolve,
    Inversion,
    Verify,
}

pub fn run(config: &RunConfig, command: Command) -> Result<RunOutput> {
    config.validate()?;
    match command {
        Command::Spectrum => spectrum(config),
        Command::Evolve => evolve(config),
        Command::Inversion => inversion(config),
        Command::Verify => verify::run_battery(config),
    }
}

fn spectrum(config: &RunConfig) -> Result<RunOutput> {
    let bundle = config.bundle()?;
    let mut table = Table::new(&["m", "E_plus", "E_minus", "C_m_plus", "C_m_minus"]);
    for p in dressed_pairs(&bundle.spectrum, &bundle.params, Execution::Parallel) {
        table.push(vec![p.m.into(), p.e_plus.into(), p.e_minus.into(), p.c_m_plus.into(), p.c_m_minus.into()]);
    }
    Ok(RunOutput { table, ..Default::default() })
}

fn evolve(config: &RunConfig) -> Result<RunOutput> {
    let bundle = config.bundle()?;
    let freqs = build_frequencies(&bundle);
    let times = config.times.points();
    let n = bundle.n();
    let mut header = vec!["t".to_string(), "unitarity_defect".into(), "oracle_deviation".into()];
    header.extend((0..n - 1).map(|m| format!("theta_{m}")));
    let mut table = Table { header, rows: Vec::new() };
    let oracle = fidelity_vs_oracle(&bundle, &freqs, &times, Region::Coupled, Execution::Parallel)?;
    let rows = par::map(Execution::Parallel, &times, |&t| {
        let u = evolution_matrix(&freqs, t);
        let mut row: Vec<Cell> = vec![t.into(), unitarity_defect(&u.u, Region::Coupled).into()];
        row.push(Cell::Float(0.0));
        row.extend((0..n - 1).map(|m| Cell::Float(u.angle(m))));
        row
    });
    for (mut row, dev) in rows.into_iter().zip(oracle) {
        row[2] = dev.into();
        table.push(row);
    }
    Ok(RunOutput { table, ..Default::default() })
}

fn inversion(config: &RunConfig) -> Result<RunOutput> {
    let bundle = config.bundle()?;
    let state = config.initial_vector()?;
    let times = config.times.points();
    let s0 = sigma3(bundle.n());
    let inv = Inversion::new(bundle);
    let mut table = Table::new(&["t", "W", "backend", "truncation_bound"]);
    let mut provenance = Vec::new();
    for backend in config.backends() {
        let sol = inv.solve(&times, &s0, backend)?;
        let w = inversion_expectation(&sol, &state)?;
        for ((t, w), p) in times.iter().zip(&w).zip(&sol.provenance) {
            table.push(vec![(*t).into(), (*w).into(), backend.name().into(), p.truncation_bound().into()]);
        }
        provenance.push(json!({ "backend": backend, "points": sol.provenance }));
    }
    Ok(RunOutput { table, reports: Vec::new(), provenance: Value::Array(provenance) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    fn cfg(extra: &str, delta: f64) -> RunConfig {
        parse_config(&format!(
            "N = 4\nalpha = 0.1\ndelta = {delta:?}\n{extra}\n[model]\nkind = \"harmonic\"\nomega = 1.0\n\
             [times]\nstart = 0.0\nstop = 3.0\ncount = 7\n"
        ))
        .unwrap()
    }

    #[test]
    fn resonant_spectrum_rows() {
        let out = run(&cfg("", 0.0), Command::Spectrum).unwrap();
        assert_eq!(out.table.rows.len(), 3);
        for (m, row) in out.table.rows.iter().enumerate() {
            let e = (m + 1) as f64;
            let (Cell::Float(hi), Cell::Float(lo)) = (&row[1], &row[2]) else { panic!() };
            assert!((hi - 1.1 * e).abs() <= 2.0 * f64::EPSILON * e);
            assert!((lo - 0.9 * e).abs() <= 2.0 * f64::EPSILON * e);
        }
    }

    #[test]
    fn inversion_from_g1_is_a_cosine() {
        let mut c = cfg("", 0.0);
        c.initial_state = crate::cli::config::InitialState::Bare { m: 1, sector: crate::cli::config::Sector::G };
        let out = run(&c, Command::Inversion).unwrap();
        for row in &out.table.rows {
            let (Cell::Float(t), Cell::Float(w)) = (&row[0], &row[1]) else { panic!() };
            assert!((w + (0.2 * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn evolve_reports_defects_and_angles() {
        let out = run(&cfg("", 0.3), Command::Evolve).unwrap();
        assert_eq!(out.table.header.len(), 3 + 3);
        for row in &out.table.rows {
            let Cell::Float(d) = row[1] else { panic!() };
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn all_backends_share_the_grid() {
        let out = run(&cfg("backend = \"all\"", 0.3), Command::Inversion).unwrap();
        assert_eq!(out.table.rows.len(), 21);
        let csv = out.table.to_csv();
        assert_eq!(csv, run(&cfg("backend = \"all\"", 0.3), Command::Inversion).unwrap().table.to_csv());
    }
}
