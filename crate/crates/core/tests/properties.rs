use proptest::prelude::*;
use qutrit_dba::adversaries::{
    traitor_a_conflicting_messages, Adversary, AdversaryStrategy, StrategyKind,
};
use qutrit_dba::agreement::{
    run_agreement, verify_against_list, AgreementConfig, Decision, Plan,
};
use qutrit_dba::distribution::{
    assemble_lists, cross_check, enumerate_honest_configurations, execute_run, reveal_and_sift,
    run_attempts, run_batch, CheckVerdict, DistributionConfig, SiftHooks,
};
use qutrit_dba::harness::{
    run_strategy_trials, run_trial_detailed, run_trials, Scenario, SimulationSpec, TrialStatus,
};
use qutrit_dba::qutrit::{BasisChoice, MixedState, PureState, C64};
use qutrit_dba::random::derive_rng;

fn honest_batch(length: usize, seed: u64) -> Vec<qutrit_dba::distribution::RunRecord> {
    let config = DistributionConfig { target_length: length, ..Default::default() };
    run_batch(&config, &mut Adversary::honest(), &mut derive_rng(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_lists_satisfy_the_sum_rule(length in 1usize..300, seed: u64) {
        let mut records = honest_batch(length, seed);
        for r in records.iter().filter(|r| r.valid) {
            prop_assert!(r.sum_rule_holds());
        }
        let config = DistributionConfig { target_length: length, ..Default::default() };
        let report = cross_check(&mut records, &config, None, None, &mut derive_rng(seed, 1));
        prop_assert_eq!(report.verdict, CheckVerdict::Clean);
        let lists = assemble_lists(&records);
        prop_assert!(lists.is_correlated());
        prop_assert!(lists.len() >= length);
        let valid = records.iter().filter(|r| r.valid).count();
        prop_assert_eq!(lists.len() + report.checked(), valid);
    }

    #[test]
    fn checked_runs_never_reach_the_lists(seed: u64) {
        let mut records = honest_batch(60, seed);
        let config = DistributionConfig { target_length: 60, ..Default::default() };
        let report = cross_check(&mut records, &config, None, None, &mut derive_rng(seed, 1));
        let lists = assemble_lists(&records);
        let kept: Vec<_> = records.iter().filter(|r| r.valid && !r.consumed_by_check).collect();
        prop_assert_eq!(kept.len(), lists.len());
        for (j, r) in kept.iter().enumerate() {
            prop_assert!(!report.checked_positions.contains(&r.run_id));
            prop_assert_eq!(lists.l_a()[j], r.choices_a.number);
            prop_assert_eq!(lists.l_b()[j], r.choices_b.number);
            prop_assert_eq!(lists.l_c()[j], r.choices_c.number);
        }
    }

    #[test]
    fn matched_zero_sum_runs_always_click(seed: u64, pick in 0usize..96) {
        let config = enumerate_honest_configurations()[pick];
        let matched = config.iter().all(|p| p.basis == config[0].basis);
        let zero = config.iter().map(|p| p.number.value()).sum::<u8>() % 3 == 0;
        let record = execute_run(0, config, None, 1.0, &mut derive_rng(seed, 0));
        let record = reveal_and_sift(record, SiftHooks::default());
        prop_assert_eq!(record.valid, matched && zero);
    }

    #[test]
    fn attack_hooks_output_valid_states(
        re in prop::array::uniform3(-1.0f64..1.0),
        im in prop::array::uniform3(-1.0f64..1.0),
        seed: u64,
        which in 0usize..14,
    ) {
        let norm = (0..3).map(|j| re[j] * re[j] + im[j] * im[j]).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let state = PureState::new([0, 1, 2].map(|j| C64::new(re[j] / norm, im[j] / norm))).unwrap();
        let strategy = &AdversaryStrategy::built_in()[which];
        let mut adversary = Adversary::from_strategy(strategy, seed).unwrap();
        if let Some(hook) = adversary.attack_hook() {
            for _ in 0..4 {
                let (out, _) = hook.intercept(state.density());
                prop_assert!(out.check().is_ok());
                prop_assert!(MixedState::new(*out.matrix()).is_ok());
            }
        }
    }

    #[test]
    fn conflicting_commander_passes_both_individual_checks(seed: u64) {
        let art = run_trial_detailed(
            &SimulationSpec::new(Scenario::Honest, 1, seed),
            &AdversaryStrategy::none(),
            0,
        ).unwrap();
        let lists = art.lists.unwrap();
        let cfg = AgreementConfig::default();
        let (to_b, to_c) = traitor_a_conflicting_messages(lists.l_a());
        prop_assert!(verify_against_list(&to_b, lists.l_b(), lists.len(), &cfg).is_consistent());
        prop_assert!(verify_against_list(&to_c, lists.l_c(), lists.len(), &cfg).is_consistent());
    }

    #[test]
    fn honest_agreement_is_complete(length in 40usize..=400, seed: u64, attack: bool) {
        let records = honest_batch(length, seed);
        let mut lists = assemble_lists(&records);
        lists.truncate(length);
        let plan = Plan::from_bit(attack);
        let t = run_agreement(&lists, plan, &AdversaryStrategy::none(), &AgreementConfig::default(), &mut derive_rng(seed, 2)).unwrap();
        for g in [t.decisions.a, t.decisions.b, t.decisions.c] {
            prop_assert_eq!(g, Some(Decision::Follow(plan)));
        }
    }

    #[test]
    fn mirroring_swaps_the_lieutenants(seed: u64, which in 0usize..14, attack: bool) {
        let strategy = &AdversaryStrategy::built_in()[which];
        prop_assume!(strategy.mirrored().validate().is_ok());
        let records = honest_batch(200, seed);
        let mut lists = assemble_lists(&records);
        lists.truncate(200);
        let cfg = AgreementConfig::default();
        let plan = Plan::from_bit(attack);
        let t = run_agreement(&lists, plan, strategy, &cfg, &mut derive_rng(seed, 3)).unwrap();
        let m = run_agreement(&lists.swap_lieutenants(), plan, &strategy.mirrored(), &cfg, &mut derive_rng(seed, 3)).unwrap();
        if strategy.kind == StrategyKind::TraitorAConflicting {
            // Which lieutenant gets which plan is fixed, so only the outcome mirrors.
            let expected = t.mirrored();
            prop_assert_eq!(m.cases, expected.cases);
            prop_assert_eq!(m.decisions, expected.decisions);
        } else {
            prop_assert_eq!(m, t.mirrored());
        }
    }

    #[test]
    fn merged_partial_reports_equal_a_single_run(seed: u64, split in 0u32..=8) {
        let mut spec = SimulationSpec::new(Scenario::TraitorB, 8, seed);
        spec.distribution.target_length = 80;
        let whole = run_trials(&spec, 0..8).unwrap();
        let merged = run_trials(&spec, split..8).unwrap().merge(run_trials(&spec, 0..split).unwrap()).unwrap();
        prop_assert_eq!(merged, whole);
    }
}

#[test]
fn transcripts_are_reproducible() {
    for strategy in AdversaryStrategy::built_in() {
        let spec = SimulationSpec::new(Scenario::Custom, 1, 99);
        let a = run_trial_detailed(&spec, &strategy, 3).unwrap();
        let b = run_trial_detailed(&spec, &strategy, 3).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.transcript, b.transcript);
        assert_eq!(a.outcome, b.outcome);
    }
}

/// Strategies whose traitor only misbehaves in the classical phase leave the
/// distribution phase bit-for-bit identical to an honest one.
#[test]
fn classical_traitors_leave_distribution_untouched() {
    let config = DistributionConfig { target_length: 100, ..Default::default() };
    for strategy in AdversaryStrategy::built_in() {
        let classical = matches!(
            strategy.kind,
            StrategyKind::None
                | StrategyKind::TraitorAConflicting
                | StrategyKind::TraitorBForgeForward { .. }
                | StrategyKind::TraitorCForgeForward { .. }
        );
        if !classical {
            continue;
        }
        for seed in 0..5 {
            let honest = run_batch(&config, &mut Adversary::honest(), &mut derive_rng(seed, 0)).unwrap();
            let mut adversary = Adversary::from_strategy(&strategy, seed + 1000).unwrap();
            let other = run_batch(&config, &mut adversary, &mut derive_rng(seed, 0)).unwrap();
            assert_eq!(honest, other, "{}", strategy.kind.name());
        }
    }
}

/// Every strategy that touches distribution shows up either as valid runs
/// breaking the sum rule or as a yield more than five standard errors from
/// the honest 1/12.
#[test]
fn distribution_attacks_are_visible() {
    let honest_yield = 1.0 / 12.0;
    let attempts = 50_000u64;
    let se = (honest_yield * (1.0 - honest_yield) / attempts as f64).sqrt();
    for strategy in AdversaryStrategy::built_in() {
        let mut adversary = Adversary::from_strategy(&strategy, 5).unwrap();
        let touches = adversary.attack_hook().is_some()
            || matches!(strategy.kind, StrategyKind::FalseDetectionReport { .. });
        if !touches {
            continue;
        }
        let records = run_attempts(attempts, 1.0, &mut adversary, &mut derive_rng(5, 0)).unwrap();
        let broken = records.iter().any(|r| {
            r.valid && r.bases_match() && r.outcome.is_some() && !r.sum_rule_holds()
        });
        let y = records.iter().filter(|r| r.valid).count() as f64 / attempts as f64;
        assert!(
            broken || (y - honest_yield).abs() > 5.0 * se,
            "{}: yield {y}",
            strategy.kind.name()
        );
    }
}

#[test]
fn dba_conditions_hold_for_every_strategy_over_many_seeds() {
    for strategy in AdversaryStrategy::built_in() {
        let spec = SimulationSpec::new(Scenario::Custom, 1000, 31);
        let report = run_strategy_trials(&spec, &strategy, 0..1000).unwrap();
        for t in &report.trials {
            assert_ne!(t.status, TrialStatus::Failed);
            assert!(t.broadcast && t.validity, "{} trial {}", strategy.kind.name(), t.trial_id);
        }
        assert_eq!(report.aggregates.dba_success_rate, 1.0);
    }
}

#[test]
fn basis_choices_are_balanced_in_honest_batches() {
    let records = run_attempts(30_000, 1.0, &mut Adversary::honest(), &mut derive_rng(17, 0)).unwrap();
    let ii = records.iter().filter(|r| r.choices_a.basis == BasisChoice::II).count() as f64;
    assert!((ii / records.len() as f64 - 0.5).abs() < 0.02);
}
