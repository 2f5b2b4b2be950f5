//! Library quantities checked against independent reference computations.

mod common;

use num_rational::Ratio;
use qutrit_dba::agreement::AgreementConfig;
use qutrit_dba::distribution::{
    enumerate_honest_configurations, exact_detection_probability, ratio_f64,
    theoretical_statistics, Hop, PartyChoices,
};
use qutrit_dba::qutrit::{
    apply_channel, apply_operator_mixed, encode_operator, outcome_probabilities, prepare_initial,
    AttackChannel, BasisChoice, MeasurementBasis,
};
use qutrit_dba::Trit;

fn choice(p: &PartyChoices) -> common::Choice {
    (p.basis == BasisChoice::II, p.number.value())
}

fn library_detection(config: &[PartyChoices; 3], attack: Option<(&AttackChannel, Hop)>) -> f64 {
    let mut rho = prepare_initial().density();
    for (i, p) in config.iter().enumerate() {
        rho = apply_operator_mixed(&p.operator(), &rho);
        if let Some((channel, hop)) = attack {
            if (i == 0 && hop == Hop::AToB) || (i == 1 && hop == Hop::BToC) {
                rho = apply_channel(channel, &rho);
            }
        }
    }
    outcome_probabilities(&rho)[0]
}

#[test]
fn honest_configurations_match_the_oracle() {
    let ours: Vec<_> = enumerate_honest_configurations().iter().map(|c| c.map(|p| choice(&p))).collect();
    let mut reference = common::honest_configurations();
    let mut sorted = ours.clone();
    sorted.sort();
    reference.sort();
    assert_eq!(sorted, reference);

    for config in enumerate_honest_configurations() {
        let oracle = common::detection(config.map(|p| choice(&p)));
        assert!((library_detection(&config, None) - oracle).abs() < 1e-12);
        assert!((ratio_f64(exact_detection_probability(&config)) - oracle).abs() < 1e-12);
        assert!((common::claimed_rule(config.map(|p| choice(&p))) - oracle).abs() < 1e-12);
    }
}

#[test]
fn intercept_resend_matches_the_oracle_on_every_configuration() {
    for (basis, oracle_basis) in [
        (MeasurementBasis::Computational, common::computational as fn(usize) -> [common::Cx; 3]),
        (MeasurementBasis::Fourier, common::fourier),
    ] {
        let channel = AttackChannel::measure_and_resend(basis);
        for hop in [Hop::AToB, Hop::BToC] {
            for config in enumerate_honest_configurations() {
                let ours = library_detection(&config, Some((&channel, hop)));
                let oracle = common::detection_with_intercept(
                    config.map(|p| choice(&p)),
                    usize::from(u8::from(hop)),
                    oracle_basis,
                );
                assert!((ours - oracle).abs() < 1e-12, "{basis:?} {hop:?} {config:?}: {ours} vs {oracle}");
            }
        }
    }
}

#[test]
fn full_dephasing_equals_computational_intercept() {
    for hop in [Hop::AToB, Hop::BToC] {
        for config in enumerate_honest_configurations() {
            let a = library_detection(&config, Some((&AttackChannel::full_dephasing(), hop)));
            let b = common::detection_with_intercept(
                config.map(|p| choice(&p)),
                usize::from(u8::from(hop)),
                common::computational,
            );
            assert!((a - b).abs() < 1e-12);
        }
    }
}

/// Run statistics by enumeration: every configuration is equally likely,
/// a run is valid when C clicks and the bases agree.
#[test]
fn theoretical_statistics_match_enumeration() {
    let configs = common::honest_configurations();
    let n = configs.len() as f64;
    let matched = |c: &[common::Choice; 3]| c.iter().all(|p| p.0 == c[0].0);

    let valid_yield: f64 = configs
        .iter()
        .filter(|c| matched(c))
        .map(|&c| common::detection(c))
        .sum::<f64>()
        / n;
    let mixed: Vec<_> = configs.iter().filter(|c| !matched(c)).collect();
    let mixed_click = mixed.iter().map(|&&c| common::detection(c)).sum::<f64>() / mixed.len() as f64;

    let mut combos = std::collections::BTreeMap::new();
    let mut a_marginal = [0.0; 3];
    for c in configs.iter().filter(|c| matched(c)) {
        let p = common::detection(*c) / n / valid_yield;
        if p > 1e-12 {
            *combos.entry((c[0].1, c[1].1, c[2].1)).or_insert(0.0) += p;
            a_marginal[usize::from(c[0].1)] += p;
        }
    }

    let theory = theoretical_statistics();
    assert!((ratio_f64(theory.valid_yield) - valid_yield).abs() < 1e-12);
    assert!((valid_yield - 1.0 / 12.0).abs() < 1e-12);
    assert!((ratio_f64(theory.mixed_basis_false_detection) - mixed_click).abs() < 1e-12);
    assert_eq!(combos.len(), 4);
    for (key, expected) in [(0, 0, 0), (1, 1, 1), (2, 0, 1), (2, 1, 0)].iter().zip(theory.combo_distribution) {
        assert!((combos[key] - ratio_f64(expected)).abs() < 1e-12, "{key:?}");
    }
    for (got, want) in a_marginal.iter().zip(theory.a_marginal) {
        assert!((got - ratio_f64(want)).abs() < 1e-12);
    }
    assert_eq!(theory.a_marginal, [Ratio::new(1, 4), Ratio::new(1, 4), Ratio::new(1, 2)]);
    for eta in [0.25, 0.5, 1.0] {
        assert!((theory.yield_at(eta) - eta / 12.0).abs() < 1e-15);
    }
}

#[test]
fn expected_message_length_is_a_quarter_of_the_list() {
    let theory = theoretical_statistics();
    let cfg = AgreementConfig::default();
    assert!((cfg.expected_fraction - ratio_f64(theory.a_marginal[0])).abs() < 1e-15);
    assert!((cfg.expected_fraction - ratio_f64(theory.a_marginal[1])).abs() < 1e-15);
    assert_eq!(cfg.typical_length(400), 100);
}

/// Every non-identity channel either leaves some matched-basis configuration
/// (deterministic when honest) with a detection probability strictly inside
/// (0, 1), or is a diagonal unitary that shifts the effective sum.
#[test]
fn attack_channels_break_determinism() {
    let matched: Vec<_> = enumerate_honest_configurations()
        .into_iter()
        .filter(|c| c.iter().all(|p| p.basis == c[0].basis))
        .collect();
    let interior = |channel: &AttackChannel| {
        [Hop::AToB, Hop::BToC].iter().any(|&hop| {
            matched.iter().any(|c| {
                let p = library_detection(c, Some((channel, hop)));
                p > 1e-9 && p < 1.0 - 1e-9
            })
        })
    };
    for channel in [
        AttackChannel::full_dephasing(),
        AttackChannel::dephasing(0.3).unwrap(),
        AttackChannel::ancilla_coupling(std::f64::consts::FRAC_PI_2),
        AttackChannel::ancilla_coupling(0.4),
        AttackChannel::measure_and_resend(MeasurementBasis::Computational),
        AttackChannel::measure_and_resend(MeasurementBasis::Fourier),
    ] {
        assert!(interior(&channel));
    }
    assert!(!interior(&AttackChannel::identity()));
    for shift in [Trit::ONE, Trit::TWO] {
        let channel = AttackChannel::phase_shift(&encode_operator(shift));
        assert!(!interior(&channel));
        // A matched, zero-sum run no longer clicks.
        let zero = enumerate_honest_configurations()
            .into_iter()
            .find(|c| c.iter().all(|p| p.basis == BasisChoice::I && p.number == Trit::ZERO))
            .unwrap();
        assert!(library_detection(&zero, Some((&channel, Hop::AToB))) < 1e-12);
    }
}
