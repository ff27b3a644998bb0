//! Checks run against a configured experiment, each producing report records.

use std::time::Instant;

use kwh_core::gabor::{bessel_check, exponential_bounds, uniform_density_check};
use kwh_core::kframe::{
    douglas_check, image_frame_check, kframe_bounds, periodization_necessity, periodization_sufficiency,
    psd_bound_check, range_characterization, restricted_homeomorphism_check, transformed_bounds, KFrameError,
    KFrameReport, KFrameStatus, VERDICT_TOLERANCE,
};
use serde_json::Value;

use crate::config::Experiment;
use crate::error::{CliError, Result};
use crate::report::{num, Record};

/// Names accepted by `verify`.
pub const CHECKS: [&str; 9] = [
    "douglas",
    "range",
    "sufficient",
    "necessary",
    "image",
    "transform",
    "restricted",
    "density",
    "bessel",
];

/// Relative increase of `A_opt` that must break the lower operator inequality.
pub const OPTIMALITY_STEP: f64 = 1e-3;

fn status_label(s: &KFrameStatus) -> String {
    match s {
        KFrameStatus::KFrame => "k_frame".into(),
        KFrameStatus::BesselOnlyStd => "bessel_only_std".into(),
        KFrameStatus::Degenerate(why) => format!("degenerate: {why}"),
    }
}

pub fn describe_bounds(rec: Record, r: &KFrameReport) -> Record {
    rec.detail("status", status_label(&r.status))
        .number("a_opt", r.a_opt_value())
        .number("b_std", r.b_std)
        .number("b_k", r.b_k.value().unwrap_or(f64::INFINITY))
        .detail("k_rank", r.k_rank)
        .number("s_min", r.s_min)
        .number("s_max", r.s_max)
        .number("range_residual", r.range_residual)
        .number("kernel_residual", r.kernel_residual)
}

fn kframe(exp: &Experiment) -> Result<KFrameReport> {
    Ok(kframe_bounds(&exp.frame_operator, &exp.k, exp.tolerances().rank_threshold)?)
}

/// Optimal constants plus the operator-inequality test at and just past them.
pub fn analyze(exp: &Experiment) -> Result<Vec<Record>> {
    let start = Instant::now();
    let r = kframe(exp)?;
    let mut bounds = describe_bounds(Record::required("kframe_bounds", "optimal-kframe-bounds", r.is_kframe()), &r);
    if let Some(a) = r.a_opt.value() {
        bounds = bounds.margin(a);
    }
    let bounds = bounds.timed(start);

    let start = Instant::now();
    let psd = match (r.is_kframe(), r.a_opt.value(), r.b_k.value()) {
        (true, Some(a), Some(b)) => psd_record(exp, a, b)?,
        _ => Record::info("psd_bounds", "operator-inequality-characterization")
            .detail("skipped", "system is not a K-frame"),
    };
    Ok(vec![bounds, psd.timed(start)])
}

fn psd_record(exp: &Experiment, a: f64, b: f64) -> Result<Record> {
    let tol = exp.tolerances().psd_tol;
    let s = &exp.frame_operator;
    let (lower, upper) = psd_bound_check(a, b, s, &exp.k, tol)?;
    let (pushed, _) = psd_bound_check(a * (1.0 + OPTIMALITY_STEP), b, s, &exp.k, tol)?;
    let ok = lower.is_psd && upper.is_psd && !pushed.is_psd;
    Ok(Record::required("psd_bounds", "operator-inequality-characterization", ok)
        .margin(lower.margin.min(upper.margin).min(-pushed.margin))
        .number("lower_min_eigenvalue", lower.min_eigenvalue)
        .number("upper_min_eigenvalue", upper.min_eigenvalue)
        .number("pushed_lower_min_eigenvalue", pushed.min_eigenvalue))
}

/// Runs one named check; `transform` without a `u` operand is an error unless
/// `lenient`, in which case it is skipped.
pub fn run_check(exp: &Experiment, name: &str, seed: u64, lenient: bool) -> Result<Vec<Record>> {
    let start = Instant::now();
    let tol = exp.tolerances();
    let recs = match name {
        "douglas" => vec![douglas(exp)?],
        "range" => {
            let anchor = "kframe-iff-range-inclusion";
            match range_characterization(&exp.atoms, &exp.k, tol.verdict_tol, tol.rank_threshold) {
                Ok(r) => vec![Record::required("range", anchor, r.agree())
                    .detail("range_included", r.range_included)
                    .detail("a_opt_positive", r.kframe_lower)
                    .number("range_residual", r.douglas.range_residual)
                    .number("a_opt", r.kframe.a_opt_value())],
                Err(e @ KFrameError::InconsistentVerdicts { .. }) => {
                    vec![Record::required("range", anchor, false).detail("error", e.to_string())]
                }
                Err(e) => return Err(e.into()),
            }
        }
        "sufficient" => vec![sufficient(exp)?],
        "necessary" => vec![necessary(exp)?],
        "image" => vec![image(exp, seed)?],
        "transform" => transform(exp, lenient)?,
        "restricted" => vec![restricted(exp, seed)?],
        "density" => vec![density(exp)?],
        "bessel" => {
            let b = bessel_check(&exp.atoms)?;
            vec![Record::required("bessel", "optimal-bessel-bound", b.consistent)
                .margin(VERDICT_TOLERANCE * b.bound.max(1.0) - b.discrepancy)
                .number("bound", b.bound)
                .number("frame_operator_max", b.frame_operator_max)
                .number("discrepancy", b.discrepancy)]
        }
        other => return Err(CliError::UnknownCheck(other.into())),
    };
    Ok(recs.into_iter().map(|r| r.timed(start)).collect())
}

fn douglas(exp: &Experiment) -> Result<Record> {
    let tol = exp.tolerances();
    let anchor = "range-inclusion-majorization-factorization";
    Ok(
        match douglas_check(exp.k.matrix(), exp.atoms.matrix(), tol.verdict_tol, tol.rank_threshold) {
            Ok(d) => Record::required("douglas", anchor, true)
                .detail("range_included", d.range_included)
                .detail("majorized", d.majorized)
                .detail("factor_exists", d.factor_exists)
                .number("range_residual", d.range_residual)
                .number("factor_residual", d.factor_residual)
                .number("majorization_margin", d.majorization_margin)
                .detail(
                    "lambda",
                    d.lambda_min_majorization.map(num).unwrap_or(Value::Null),
                ),
            Err(e @ KFrameError::InconsistentVerdicts { .. }) => {
                Record::required("douglas", anchor, false).detail("error", e.to_string())
            }
            Err(e) => return Err(e.into()),
        },
    )
}

fn sufficient(exp: &Experiment) -> Result<Record> {
    let tol = exp.tolerances();
    let r = periodization_sufficiency(exp.system.window(), exp.system.shifts(), &exp.k, tol.rank_threshold)?;
    let anchor = "periodization-sufficient-condition";
    let rec = match (r.confirmed, r.margins) {
        (Some(ok), Some((lo, hi))) => Record::required("sufficient", anchor, ok)
            .margin(lo.min(hi))
            .number("lower_margin", lo)
            .number("upper_margin", hi),
        _ => Record::info("sufficient", anchor).detail("admissible", false),
    };
    Ok(rec
        .number("p_min", r.p_min)
        .number("p_max", r.p_max)
        .number("norm_k", r.norm_k)
        .number("a1", r.exp_bounds.0)
        .number("b1", r.exp_bounds.1))
}

fn necessary(exp: &Experiment) -> Result<Record> {
    let tol = exp.tolerances();
    let anchor = "periodization-necessary-condition";
    let kr = kframe(exp)?;
    if !kr.is_kframe() {
        return Ok(Record::info("necessary", anchor).detail("skipped", "system is not a K-frame"));
    }
    let (a0, b0) = exponential_bounds(&exp.grid, exp.system.frequencies(), &exp.exp_window)?;
    if !(a0 > tol.rank_threshold * b0) {
        return Ok(Record::info("necessary", anchor)
            .detail("skipped", "exponential system is not a frame on the chosen block")
            .number("a0", a0));
    }
    let r = periodization_necessity(&exp.atoms, &exp.k, (a0, b0), tol.rank_threshold)?;
    Ok(Record::required("necessary", anchor, r.holds)
        .margin(r.margin)
        .number("bound", r.bound)
        .number("p_max", r.p_max)
        .number("b_k", r.b_k)
        .number("a0", r.a0)
        .number("norm_k", r.norm_k)
        .detail("exp_window", exp.exp_window.clone()))
}

fn image(exp: &Experiment, seed: u64) -> Result<Record> {
    let tol = exp.tolerances();
    let anchor = "image-of-frame-under-k";
    let r = match image_frame_check(&exp.atoms, &exp.k, seed, tol.rank_threshold) {
        Ok(r) => r,
        Err(KFrameError::NotAFrame { lower, upper }) => {
            return Ok(Record::info("image", anchor)
                .detail("skipped", "system is not a frame")
                .number("lower", lower)
                .number("upper", upper))
        }
        Err(e) => return Err(e.into()),
    };
    let unitary = exp.k.is_unitary();
    let preserved = r
        .optimal_lower
        .value()
        .map(|a| (a - r.a).abs() <= tol.verdict_tol * r.a);
    let ok = r.verified && (!unitary || preserved == Some(true));
    let mut rec = Record::required("image", anchor, ok)
        .margin(r.worst_lower_margin.min(r.worst_upper_margin))
        .number("a", r.a)
        .number("b", r.b)
        .number("norm_k", r.norm_k)
        .number("image_a_opt", r.optimal_lower.value().unwrap_or(f64::INFINITY))
        .detail("k_unitary", unitary);
    if let Some(p) = preserved {
        rec = rec.detail("lower_constant_preserved", p);
    }
    Ok(rec)
}

fn transform(exp: &Experiment, lenient: bool) -> Result<Vec<Record>> {
    let anchor = "commuting-homeomorphism-bounds";
    let Some(u) = &exp.u else {
        if lenient {
            return Ok(vec![Record::info("transform", anchor).detail("skipped", "config has no u operator")]);
        }
        return Err(CliError::MissingOperand("transform needs `u` in the config".into()));
    };
    let tol = exp.tolerances();
    let r = match transformed_bounds(&exp.atoms, &exp.k, u, tol.verdict_tol, tol.rank_threshold) {
        Ok(r) => r,
        Err(KFrameError::NotAKFrame(why)) => {
            return Ok(vec![Record::info("transform", anchor).detail("skipped", why)]);
        }
        Err(e @ (KFrameError::NonCommuting { .. } | KFrameError::NotInvertible { .. })) => {
            return Err(CliError::Config(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let u2 = r.norm_u * r.norm_u;
    let required = Record::required("transform", anchor, r.required_pass())
        .margin((r.a2 - r.a1 / u2).min(r.b1 * u2 - r.b2) / r.a1.max(r.b1))
        .number("a1", r.a1)
        .number("b1", r.b1)
        .number("a2", r.a2)
        .number("b2", r.b2)
        .number("norm_u", r.norm_u)
        .number("norm_u_inv", r.norm_u_inv)
        .detail("u_unitary", r.u_unitary)
        .detail("general_lower_a", r.general_lower_a)
        .detail("general_upper_b", r.general_upper_b)
        .detail("unitary_equality", r.unitary_equality);
    let estimates = Record::info("transform_estimates", anchor)
        .detail("upper_a_inverse_norm", r.upper_a_inverse_norm)
        .detail("lower_b_norm", r.lower_b_norm)
        .detail("lower_a_inverse_norm", r.lower_a_inverse_norm);
    Ok(vec![required, estimates])
}

fn restricted(exp: &Experiment, seed: u64) -> Result<Record> {
    let tol = exp.tolerances();
    let anchor = "restricted-frame-operator-bounds";
    let kr = kframe(exp)?;
    if !kr.is_kframe() {
        return Ok(Record::info("restricted", anchor).detail("skipped", "system is not a K-frame"));
    }
    let a = kr.a_opt_value();
    let r = restricted_homeomorphism_check(&exp.frame_operator, &exp.k, a, kr.b_std, seed, tol.rank_threshold)?;
    Ok(Record::required("restricted", anchor, r.verified)
        .margin(
            r.inverse_lower_margin
                .min(r.inverse_upper_margin)
                .min(r.form_lower_margin)
                .min(r.form_upper_margin),
        )
        .number("a", r.a)
        .number("b", r.b)
        .number("pinv_norm", r.pinv_norm)
        .number("inverse_lower_margin", r.inverse_lower_margin)
        .number("inverse_upper_margin", r.inverse_upper_margin)
        .number("form_lower_margin", r.form_lower_margin)
        .number("form_upper_margin", r.form_upper_margin))
}

/// Positions of the sorted shifts against the uniform sequence `n·N/P`.
fn density(exp: &Experiment) -> Result<Record> {
    let n = exp.grid.total();
    let mut positions: Vec<usize> = exp
        .system
        .shifts()
        .iter()
        .map(|s| exp.grid.flatten(&exp.grid.wrap(s)))
        .collect();
    positions.sort_unstable();
    let p = positions.len();
    let sequence: Vec<(i64, f64)> = positions.iter().enumerate().map(|(i, &x)| (i as i64, x as f64)).collect();
    let d = p as f64 / n as f64;
    let r = uniform_density_check(&sequence, d, 1.0 / d)?;
    Ok(Record::info("density", "uniform-density")
        .detail("uniform", r.result)
        .number("density", r.density)
        .number("spread", r.spread)
        .number("worst_deviation", r.worst_deviation)
        .detail("worst_index", r.worst_index))
}
