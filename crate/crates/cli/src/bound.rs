use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use steering_core::criteria::{
    degradation_radius, normalize_bob_marginal, twirling_bound, IsotropicDenominator, TwirlingBound,
};
use steering_core::qops::{isotropic_state, werner_state, BipartiteState, CMatrix};
use steering_core::radii::{
    critical_radius_dichotomic, reference_thresholds, FamilyKind, StateFamily,
};
use steering_core::C64;

use crate::Failure;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasurementClass {
    /// Dichotomic POVMs.
    #[value(name = "2")]
    #[serde(rename = "2")]
    Dichotomic,
    /// Projective measurements.
    #[value(name = "pvm")]
    #[serde(rename = "pvm")]
    Projective,
}

pub struct BoundConfig {
    pub anchor: FamilyKind,
    pub class: MeasurementClass,
    pub tol: f64,
    pub denominator: IsotropicDenominator,
    pub max_dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    #[serde(alias = "matrix")]
    rho: Vec<[f64; 2]>,
}

pub fn load_state(path: &Path, max_dim: usize) -> Result<BipartiteState, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    for d in [file.dim_a, file.dim_b] {
        if !(2..=max_dim).contains(&d) {
            return Err(Failure::Input(format!(
                "local dimension {d} outside 2..={max_dim}"
            )));
        }
    }
    let n = file.dim_a * file.dim_b;
    if file.rho.len() != n * n {
        return Err(Failure::Input(format!(
            "expected {} matrix entries for dimA*dimB = {n}, found {}",
            n * n,
            file.rho.len()
        )));
    }
    let m = CMatrix::from_row_iterator(n, n, file.rho.iter().map(|&[re, im]| C64::new(re, im)));
    Ok(BipartiteState::new(file.dim_a, file.dim_b, m)?)
}

#[derive(Debug, Serialize)]
pub struct BoundReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub measurement_class: MeasurementClass,
    pub anchor: FamilyKind,
    pub anchor_eta: f64,
    /// Largest mixing parameter reachable from the anchor by a channel on Alice's side.
    pub lower_bound: f64,
    pub lower_bound_certified: bool,
    /// Smallest mixing parameter shown unreachable.
    pub lower_bound_bracket_upper: f64,
    pub upper_bound: Option<TwirlingBound>,
    pub isotropic_denominator: IsotropicDenominator,
    pub verdict: String,
}

/// Anchor radius of `kind` in dimension `d` for the given class.
fn radius(kind: FamilyKind, d: usize, class: MeasurementClass) -> Result<f64, Failure> {
    let family = StateFamily::new(kind, d)?;
    Ok(match class {
        MeasurementClass::Dichotomic => critical_radius_dichotomic(family)?.value,
        MeasurementClass::Projective => reference_thresholds(family).projective,
    })
}

pub fn run(path: &Path, config: &BoundConfig) -> Result<BoundReport, Failure> {
    if !(config.tol > 0.0 && config.tol < 1e-2) {
        return Err(Failure::Input(format!(
            "tolerance {} must lie in (0, 1e-2)",
            config.tol
        )));
    }
    let raw = load_state(path, config.max_dim)?;
    let rho = normalize_bob_marginal(&raw)?;
    let d = rho.dim_b();
    let anchor_eta = radius(config.anchor, d, config.class)?;
    let tau = match config.anchor {
        FamilyKind::Werner => werner_state(d, anchor_eta)?,
        FamilyKind::Isotropic => isotropic_state(d, anchor_eta)?,
    };
    let found = degradation_radius(&rho, &tau, config.tol)?;
    // a channel's dual maps dichotomic POVMs to dichotomic POVMs, but
    // projective measurements only to general POVMs
    let certified = config.class == MeasurementClass::Dichotomic;

    let upper_bound = if rho.dim_a() == rho.dim_b() {
        let rw = radius(FamilyKind::Werner, d, config.class)?;
        let ri = radius(FamilyKind::Isotropic, d, config.class)?;
        Some(twirling_bound(&rho, rw, ri, config.denominator)?)
    } else {
        None
    };

    let level = match config.class {
        MeasurementClass::Dichotomic => "dichotomic measurements",
        MeasurementClass::Projective => "projective measurements",
    };
    let verdict = if certified && found.eta >= 1.0 - config.tol {
        format!("certified-unsteerable for {level}")
    } else if upper_bound.is_some_and(|b| b.certifies_steerable()) {
        format!("certified-steerable with {level}")
    } else {
        "inconclusive".to_string()
    };
    Ok(BoundReport {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        measurement_class: config.class,
        anchor: config.anchor,
        anchor_eta,
        lower_bound: found.eta,
        lower_bound_certified: certified,
        lower_bound_bracket_upper: found.upper,
        upper_bound,
        isotropic_denominator: config.denominator,
        verdict,
    })
}

pub fn write_text(w: &mut dyn Write, r: &BoundReport) -> std::io::Result<()> {
    writeln!(w, "dimensions: {} x {}", r.dim_a, r.dim_b)?;
    writeln!(w, "anchor: {} at eta = {}", r.anchor, r.anchor_eta)?;
    let tag = if r.lower_bound_certified {
        ""
    } else {
        " (heuristic)"
    };
    writeln!(
        w,
        "lower bound (channel degradation): {}{tag}",
        r.lower_bound
    )?;
    match &r.upper_bound {
        Some(b) => {
            writeln!(w, "F_S = {}, F_W = {}", b.fidelities.f_s, b.fidelities.f_w)?;
            writeln!(w, "upper bound (twirling): {}", b.value)?;
        }
        None => writeln!(w, "upper bound (twirling): unavailable for dimA != dimB")?,
    }
    writeln!(w, "verdict: {}", r.verdict)
}
