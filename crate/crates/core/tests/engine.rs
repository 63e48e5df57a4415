use cda_abm::agents::AdditionalKind;
use cda_abm::rng;
use cda_abm::sim::{build_schedule, Activation, RunOptions, SimConfig};
use cda_abm::{run_simulation, run_simulation_with, Simulation, TickPrice};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn small(seed: u64) -> SimConfig {
    SimConfig {
        n_agents: 100,
        tau_max: 1_000,
        t_c: 1_000,
        ta: 2_000,
        t_end: 30_000,
        seed,
        ..SimConfig::scaled()
    }
}

#[test]
fn one_loop_without_additional_agents() {
    let config = SimConfig {
        t_end: 100,
        ..small(1)
    }
    .without_additional();
    let r = run_simulation_with::<f64>(&config, RunOptions::full()).unwrap();
    assert_eq!(r.steps, 100);
    assert_eq!(r.na_orders, 100);
    assert!(r.additional.is_empty());
    assert_eq!(r.mean_profit_per_aa(), None);
    assert!(r.audit.unwrap().is_clean());
}

#[test]
fn identical_seeds_reproduce_everything() {
    let config = small(9).with_additional(AdditionalKind::Technical, 30);
    let a = run_simulation_with::<f64>(&config, RunOptions::full()).unwrap();
    let b = run_simulation_with::<f64>(&config, RunOptions::full()).unwrap();
    assert_eq!(a, b);
    assert!(a.trade_digest.as_ref().unwrap().checksum.len() == 64);
    let c = run_simulation_with::<f64>(&small(10).with_additional(AdditionalKind::Technical, 30), RunOptions::full()).unwrap();
    assert_ne!(a.price_digest, c.price_digest);
}

#[test]
fn single_precision_runs() {
    let r = run_simulation_with::<f32>(&small(3), RunOptions::full()).unwrap();
    assert_eq!(r.steps, 30_000);
    assert!(r.audit.unwrap().is_clean());
}

#[test]
fn history_feeds_the_next_step() {
    let config = small(5).with_additional(AdditionalKind::Fundamental, 10);
    let mut sim = Simulation::new(config.clone(), RunOptions::summary()).unwrap();
    assert_eq!(sim.history().latest(), config.fundamental_ticks());
    let mut previous = sim.history().latest();
    for _ in 0..5_000 {
        let t = sim.now() + 1;
        assert_eq!(sim.history().get(t - 1), Some(previous));
        let recorded = sim.step().unwrap();
        assert_eq!(sim.now(), t);
        assert_eq!(sim.history().get(t), Some(recorded));
        assert_eq!(sim.history().latest(), recorded);
        let (bid, ask) = (sim.book().best_bid(), sim.book().best_ask());
        if let (Some(b), Some(a)) = (bid, ask) {
            let mid = (b.ticks() + a.ticks() + 1) / 2;
            assert_eq!(recorded, TickPrice::new(mid));
        }
        previous = recorded;
    }
}

#[test]
fn first_step_records_fundamental_on_empty_book() {
    let config = small(2);
    let mut sim = Simulation::new(config.clone(), RunOptions::summary()).unwrap();
    let p1 = sim.step().unwrap();
    // One resting order cannot make a two-sided book.
    assert!(sim.book().len() <= 1);
    assert_eq!(p1, config.fundamental_ticks());
}

#[test]
fn additional_agents_do_not_shift_normal_agent_draws() {
    let base = small(21);
    let a = Simulation::new(base.without_additional(), RunOptions::summary()).unwrap();
    let b = Simulation::new(base.with_additional(AdditionalKind::Technical, 50), RunOptions::summary()).unwrap();
    let pa: Vec<_> = a.normal_params().copied().collect();
    let pb: Vec<_> = b.normal_params().copied().collect();
    assert_eq!(pa, pb);
}

#[test]
fn additional_agents_respect_activation_and_slots() {
    let config = small(8).with_additional(AdditionalKind::Fundamental, 20);
    let r = run_simulation_with::<f64>(&config, RunOptions::full()).unwrap();
    let log = r.trade_log.unwrap();
    let n = config.n_agents as u64;
    for aa in &r.additional {
        let id = config.n_agents + aa.index - 1;
        for tr in log.iter().filter(|t| t.taker_order.is_none() && (t.buyer.0 == id || t.seller.0 == id)) {
            let slot = (tr.time - 1) % n + 1;
            let loop_index = (tr.time - 1) / n + 1;
            assert_eq!(slot as u32, aa.slot);
            assert!(loop_index >= aa.index as u64);
        }
        // Profit is cash plus holdings at the fundamental.
        assert!((-1..=1).contains(&aa.position));
    }
    assert!(r.audit.unwrap().is_clean());
}

#[test]
fn all_at_start_activation() {
    let mut config = small(8).with_additional(AdditionalKind::Technical, 5);
    config.activation = Activation::AllAtStart;
    let r = run_simulation(&config).unwrap();
    assert_eq!(r.additional.len(), 5);
}

#[test]
fn schedule_slots_are_uniform() {
    let n = 100u32;
    let mut r = rng::stream(31, rng::SCHEDULE_STREAM);
    let schedule = build_schedule(&mut r, n, 10_000, Activation::OnePerLoop);
    let mut counts = vec![0f64; n as usize];
    for e in &schedule.entries {
        counts[e.slot as usize - 1] += 1.0;
    }
    let expected = 10_000.0 / n as f64;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 {chi2}, p {p}");
    let loops: Vec<u64> = schedule.entries.iter().take(3).map(|e| e.activation_loop).collect();
    assert_eq!(loops, vec![1, 2, 3]);
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let mut config = small(1);
    config.t_end = 10;
    assert!(run_simulation(&config).is_err());
    config = small(1);
    config.price_spread = -1.0;
    assert!(Simulation::new(config, RunOptions::summary()).is_err());
}
