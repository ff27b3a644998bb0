//! Canned desk-scale demonstrations with CSV plot data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kwh_core::gabor::{analysis, frame_operator, periodization, FrameOperatorMatrix};
use kwh_core::kframe::{douglas_check, transformed_bounds, KFrameError, VERDICT_TOLERANCE};
use kwh_core::numerics::{hermitian_eig, DEFAULT_RANK_THRESHOLD as RT};
use kwh_core::operators::{fourier_diagonal_pair, BoundedOperator, GridSpec, Signal};
use kwh_core::random::{stream, trial_stream_id};
use kwh_core::testbeds::{douglas_pair, random_frame, DouglasFamily};
use num_complex::Complex64;

use crate::checks::{self, CHECKS};
use crate::config::{
    Experiment, ExperimentConfig, FrequencySpec, OperatorSpec, ShiftSpec, Tolerances, TransformSpec, WindowSpec,
};
use crate::error::{CliError, Result};
use crate::report::{Environment, Record, VerificationReport};

pub const DEMOS: [&str; 3] = ["block-basis", "douglas", "sandwich"];

/// Indicator window of length `l` on `Z_n`, shifts of step `l`, frequencies
/// of step `n / l`, `K = T_ξ`, and a unitary Fourier-diagonal `U`.
pub fn block_basis_config(n: usize, l: usize, xi: i64) -> ExperimentConfig {
    ExperimentConfig {
        grid: vec![n],
        window: WindowSpec::Indicator {
            lengths: vec![l],
            height: 1.0 / (l as f64).sqrt(),
        },
        frequencies: FrequencySpec::LatticeStep {
            step: vec![(n / l) as f64],
        },
        shifts: ShiftSpec::Generator {
            matrix: vec![vec![l as i64]],
        },
        k: OperatorSpec::Translation { shift: vec![xi] },
        u: Some(TransformSpec {
            operator: OperatorSpec::FourierDiagonal { seed: 7 },
            unitary: true,
            scale: 1.0,
        }),
        tolerances: Tolerances::default(),
        seed: 0,
        exp_window: None,
    }
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn spectrum_rows(s: &FrameOperatorMatrix) -> Result<Vec<Vec<String>>> {
    let eig = hermitian_eig(s.matrix()).map_err(KFrameError::from)?;
    Ok(eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, l)| vec![i.to_string(), l.to_string()])
        .collect())
}

pub fn run_demo(name: &str, seed: u64, plot_dir: Option<&Path>) -> Result<VerificationReport> {
    if let Some(dir) = plot_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let start = Instant::now();
    let (records, grid) = match name {
        "block-basis" => block_basis(seed, plot_dir)?,
        "douglas" => douglas(seed, plot_dir)?,
        "sandwich" => sandwich(seed, plot_dir)?,
        other => return Err(CliError::UnknownDemo(other.into())),
    };
    let mut env = Environment::new(&format!("demo {name}"), seed, Tolerances::default());
    env.grid = grid;
    Ok(VerificationReport::new(env, records, start.elapsed().as_secs_f64() * 1e3))
}

type DemoOutput = (Vec<Record>, Option<Vec<usize>>);

fn block_basis(seed: u64, plot_dir: Option<&Path>) -> Result<DemoOutput> {
    let mut config = block_basis_config(64, 8, 3);
    config.seed = seed;
    let exp = Experiment::build(config, Path::new("."))?;
    let mut records = checks::analyze(&exp)?;
    for name in CHECKS {
        records.extend(checks::run_check(&exp, name, seed, true)?);
    }
    if let Some(dir) = plot_dir {
        write_csv(dir, "spectrum.csv", &["index", "eigenvalue"], spectrum_rows(&exp.frame_operator)?)?;
        let p = periodization(exp.system.window(), exp.system.shifts())?;
        let rows = p
            .real_parts()
            .iter()
            .enumerate()
            .map(|(t, v)| vec![t.to_string(), v.to_string()])
            .collect();
        write_csv(dir, "periodization.csv", &["t", "p_t"], rows)?;
        let probe = Signal::gaussian(&exp.grid, &[20.0], &[6.0])?;
        let coeffs = analysis(&exp.atoms, &probe)?;
        let rows = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let (m, n) = exp.atoms.index_pair(j);
                vec![j.to_string(), m.to_string(), n.to_string(), c.norm().to_string()]
            })
            .collect();
        write_csv(dir, "coefficients.csv", &["index", "m", "n", "magnitude"], rows)?;
    }
    Ok((records, Some(exp.grid.sizes().to_vec())))
}

fn douglas(seed: u64, plot_dir: Option<&Path>) -> Result<DemoOutput> {
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for i in 0..20 {
        let family = if i % 2 == 0 { DouglasFamily::Included } else { DouglasFamily::Obstructed };
        let mut rng = stream(seed, trial_stream_id(0xd0, i));
        let (t1, t2) = douglas_pair(&mut rng, family, 8);
        let check = format!("douglas_pair_{i:02}");
        let anchor = "range-inclusion-majorization-factorization";
        let start = Instant::now();
        let rec = match douglas_check(&t1, &t2, VERDICT_TOLERANCE, RT) {
            Ok(d) => {
                rows.push(vec![
                    i.to_string(),
                    format!("{family:?}").to_lowercase(),
                    d.range_included.to_string(),
                    d.majorized.to_string(),
                    d.factor_exists.to_string(),
                    d.range_residual.to_string(),
                    d.factor_residual.to_string(),
                    d.majorization_margin.to_string(),
                ]);
                Record::required(&check, anchor, true)
                    .detail("family", format!("{family:?}").to_lowercase())
                    .detail("range_included", d.range_included)
                    .detail("majorized", d.majorized)
                    .detail("factor_exists", d.factor_exists)
                    .number("range_residual", d.range_residual)
                    .number("factor_residual", d.factor_residual)
            }
            Err(e @ KFrameError::InconsistentVerdicts { .. }) => {
                Record::required(&check, anchor, false).detail("error", e.to_string())
            }
            Err(e) => return Err(e.into()),
        };
        records.push(rec.timed(start));
    }
    if let Some(dir) = plot_dir {
        write_csv(
            dir,
            "douglas.csv",
            &[
                "pair",
                "family",
                "range_included",
                "majorized",
                "factor_exists",
                "range_residual",
                "factor_residual",
                "majorization_margin",
            ],
            rows,
        )?;
    }
    Ok((records, None))
}

fn sandwich(seed: u64, plot_dir: Option<&Path>) -> Result<DemoOutput> {
    let grid = GridSpec::line(16)?;
    let mut rng = stream(seed, trial_stream_id(0x5a, 0));
    let base = random_frame(&mut rng, &grid);
    let (k, unitary_u) = fourier_diagonal_pair(&grid, seed, true);
    let (_, general_u) = fourier_diagonal_pair(&grid, seed, false);
    let doubled = BoundedOperator::identity(&grid).scaled(Complex64::new(2.0, 0.0));
    if let Some(dir) = plot_dir {
        write_csv(dir, "spectrum_original.csv", &["index", "eigenvalue"], spectrum_rows(&base.frame_operator)?)?;
    }
    let mut records = Vec::new();
    for (label, u) in [("unitary", &unitary_u), ("general", &general_u), ("doubled", &doubled)] {
        let start = Instant::now();
        let b = transformed_bounds(&base.atoms, &k, u, VERDICT_TOLERANCE, RT)?;
        records.push(
            Record::required(&format!("sandwich_{label}"), "commuting-homeomorphism-bounds", b.required_pass())
                .number("a1", b.a1)
                .number("b1", b.b1)
                .number("a2", b.a2)
                .number("b2", b.b2)
                .number("norm_u", b.norm_u)
                .number("norm_u_inv", b.norm_u_inv)
                .detail("general_lower_a", b.general_lower_a)
                .detail("general_upper_b", b.general_upper_b)
                .detail("unitary_equality", b.unitary_equality)
                .detail("upper_a_inverse_norm", b.upper_a_inverse_norm)
                .detail("lower_b_norm", b.lower_b_norm)
                .detail("lower_a_inverse_norm", b.lower_a_inverse_norm)
                .timed(start),
        );
        if let Some(dir) = plot_dir {
            let s = frame_operator(&base.atoms.map_atoms(u.matrix())?);
            write_csv(dir, &format!("spectrum_{label}.csv"), &["index", "eigenvalue"], spectrum_rows(&s)?)?;
        }
    }
    Ok((records, Some(grid.sizes().to_vec())))
}
