//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export takes plain arguments and returns a JSON string, so the
//! functions are equally usable from native tests.

use qutrit_dba::adversaries::Adversary;
use qutrit_dba::distribution::{
    exact_detection_probability, run_attempts, theoretical_statistics, Hop, PartyChoices,
};
use qutrit_dba::harness::{emit_report, parse_cli, run_scenario, CliError};
use qutrit_dba::qutrit::{
    apply_channel, apply_operator_mixed, encode_operator, outcome_probabilities, prepare_initial,
    AttackChannel, BasisChoice, MeasurementBasis, PhaseOperator,
};
use qutrit_dba::random::derive_rng;
use qutrit_dba::Trit;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest trial count the in-browser scenario runner accepts.
pub const MAX_BROWSER_TRIALS: u32 = 500;

fn basis(s: &str) -> Result<BasisChoice, String> {
    match s {
        "I" | "i" | "1" => Ok(BasisChoice::I),
        "II" | "ii" | "2" => Ok(BasisChoice::II),
        _ => Err(format!("unknown basis {s:?}")),
    }
}

fn attack_channel(name: &str) -> Result<Option<AttackChannel>, String> {
    Ok(match name {
        "none" => None,
        "intercept_computational" => Some(AttackChannel::measure_and_resend(
            MeasurementBasis::Computational,
        )),
        "intercept_fourier" => Some(AttackChannel::measure_and_resend(MeasurementBasis::Fourier)),
        "dephasing" => Some(AttackChannel::full_dephasing()),
        "phase_shift" => Some(AttackChannel::phase_shift(&encode_operator(Trit::ONE))),
        _ => return Err(format!("unknown attack {name:?}")),
    })
}

/// Outcome probabilities at C for one choice of bases and numbers, with an
/// optional attack channel acting on hop 1 (A→B) or 2 (B→C).
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn explore(
    basis_a: &str,
    number_a: u8,
    basis_b: &str,
    number_b: u8,
    basis_c: &str,
    number_c: u8,
    attack: &str,
    hop: u8,
) -> Result<String, String> {
    let err = |e: qutrit_dba::Error| e.to_string();
    let choices = [
        PartyChoices::commander(basis(basis_a)?, Trit::new(number_a).map_err(err)?),
        PartyChoices::lieutenant(basis(basis_b)?, Trit::new(number_b).map_err(err)?).map_err(err)?,
        PartyChoices::lieutenant(basis(basis_c)?, Trit::new(number_c).map_err(err)?).map_err(err)?,
    ];
    let hop = Hop::try_from(hop).map_err(err)?;
    let channel = attack_channel(attack)?;

    let mut rho = prepare_initial().density();
    for (i, party) in choices.iter().enumerate() {
        rho = apply_operator_mixed(&party.operator(), &rho);
        let at_hop = (i == 0 && hop == Hop::AToB) || (i == 1 && hop == Hop::BToC);
        if let (true, Some(ch)) = (at_hop, &channel) {
            rho = apply_channel(ch, &rho);
        }
    }
    let probabilities = outcome_probabilities(&rho);
    let composed = PhaseOperator::compose_all(&choices.map(|c| c.operator()));
    let honest = exact_detection_probability(&choices);
    let sum = (u32::from(number_a) + u32::from(number_b) + u32::from(number_c)) % 3;
    Ok(json!({
        "probabilities": probabilities,
        "detection": probabilities[0],
        "honest_detection": honest.to_string(),
        "bases_match": choices.iter().all(|c| c.basis == choices[0].basis),
        "sum_mod_3": sum,
        "composed_phases": composed.phases(),
        "purity": rho.purity(),
    })
    .to_string())
}

/// Empirical valid-run yield of honest distribution at `points` evenly
/// spaced efficiencies in (0, 1], next to the theoretical η/12.
#[wasm_bindgen]
pub fn yield_curve(attempts: u32, points: u32, seed: u32) -> Result<String, String> {
    if points == 0 || points > 20 {
        return Err("points must be between 1 and 20".into());
    }
    if attempts == 0 || attempts > 1_000_000 {
        return Err("attempts must be between 1 and 1000000".into());
    }
    let theory = theoretical_statistics();
    let mut rows = Vec::new();
    for k in 1..=points {
        let eta = f64::from(k) / f64::from(points);
        let mut rng = derive_rng(u64::from(seed), u64::from(k));
        let records = run_attempts(u64::from(attempts), eta, &mut Adversary::honest(), &mut rng)
            .map_err(|e| e.to_string())?;
        let valid = records.iter().filter(|r| r.valid).count();
        rows.push(json!({
            "efficiency": eta,
            "attempts": attempts,
            "valid": valid,
            "yield": valid as f64 / f64::from(attempts),
            "theory": theory.yield_at(eta),
        }));
    }
    Ok(serde_json::Value::Array(rows).to_string())
}

/// Runs a scenario from a `simulate` style argument string, e.g.
/// `--scenario traitor_a --trials 50 --format summary`.
#[wasm_bindgen]
pub fn simulate(args: &str) -> Result<String, String> {
    let argv = std::iter::once("simulate").chain(args.split_whitespace());
    let inv = parse_cli(argv).map_err(|e| match e {
        CliError::Display(s) | CliError::Usage(s) => s,
    })?;
    if inv.spec.trials > MAX_BROWSER_TRIALS {
        return Err(format!("at most {MAX_BROWSER_TRIALS} trials in the browser"));
    }
    let report = run_scenario(&inv.spec).map_err(|e| e.to_string())?;
    Ok(emit_report(&report, inv.format))
}
