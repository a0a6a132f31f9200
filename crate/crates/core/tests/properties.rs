use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntn_marl::channel::{apr_relation, fso_rate, hybrid_rate, rf_rate, solve_mu_star, ChannelParams, ChannelSettings, LinkType};
use ntn_marl::dynamics::{step_uav, visible_sats, OrbitalLane, UavState};
use ntn_marl::energy::{uav_power, PowerParams};
use ntn_marl::env::{reward_best_effort, ActionSpace, Objective, RewardMode, RewardWeights};
use ntn_marl::marl::a2c::advantage;
use ntn_marl::marl::policy::{head_probabilities, sample};
use ntn_marl::network::{evaluate_paths, AssociationMatrix, SlotGeometry};
use ntn_marl::Vec3;

fn params() -> ChannelParams {
    ChannelParams::new(&ChannelSettings::default()).unwrap()
}

fn weights() -> RewardWeights {
    RewardWeights {
        mu_rate: 4e5,
        sigma_rate: 1e5,
        mu_energy: 2000.0,
        sigma_energy: 2000.0,
        mu_distance: 1.5e6,
        sigma_distance: 1.5e6,
        d_max: 1.5e6,
        mode: RewardMode::BestEffort,
        objective: Objective::EeMax,
    }
}

proptest! {
    #[test]
    fn rates_decrease_with_distance(d in 1.0f64..6e6, f in 1.0001f64..3.0) {
        let p = params();
        prop_assert!(rf_rate(d * f, &p).unwrap() < rf_rate(d, &p).unwrap());
        prop_assert!(fso_rate(d * f, &p).unwrap() <= fso_rate(d, &p).unwrap());
    }

    #[test]
    fn hybrid_is_max(d in 1.0f64..6e6) {
        let p = params();
        let (h, kind) = hybrid_rate(d, &p).unwrap();
        let (rf, fso) = (rf_rate(d, &p).unwrap(), fso_rate(d, &p).unwrap());
        prop_assert_eq!(h, rf.max(fso));
        prop_assert_eq!(kind == LinkType::Fso, fso >= rf);
    }

    #[test]
    fn mu_star_residual(alpha in 0.001f64..0.499) {
        let mu = solve_mu_star(alpha).unwrap();
        prop_assert!((apr_relation(mu) - alpha).abs() < 1e-9);
    }

    #[test]
    fn kinematics_average_velocity(
        vx in -100.0f64..100.0, vy in -100.0f64..100.0,
        ax in -3.5f64..3.5, ay in -3.5f64..3.5, dt in 0.1f64..20.0,
    ) {
        let s = UavState::new(0, Vec3::new(1e5, -2e5, 5e4), Vec3::new(vx, vy, 0.0));
        let n = step_uav(&s, Vec3::new(ax, ay, 0.0), dt, 5.0).unwrap();
        let expected = s.position + (s.velocity + n.velocity) * (0.5 * dt);
        prop_assert!((n.position - expected).norm() < 1e-6);
        prop_assert_eq!(n.position.z, s.position.z);
    }

    #[test]
    fn lane_period_when_advance_divides_segment(period in 2usize..200, visible in 1usize..4, n in 0usize..500) {
        let advance = 50e3;
        let segment = advance * period as f64;
        let lane = OrbitalLane {
            index: 0, x: 0.0, y_start: 0.0, altitude: 550e3, speed: advance / 10.0,
            segment_length: segment, circumference: segment * 7.0, spacing: segment / visible as f64,
            visible, phase: 0.0, dt: 10.0,
        };
        lane.validate().unwrap();
        let a = visible_sats(&lane, n);
        let b = visible_sats(&lane, n + period);
        prop_assert_eq!(a.len(), visible);
        for (x, y) in a.iter().zip(&b) {
            let gap = (x.position.y - y.position.y).abs();
            prop_assert!(gap < 1e-3 || (gap - segment).abs() < 1e-3);
        }
    }

    #[test]
    fn power_is_rotation_invariant(
        vx in -60.0f64..60.0, vy in -60.0f64..60.0,
        ax in -5.0f64..5.0, ay in -5.0f64..5.0, theta in 0.0f64..6.3,
    ) {
        let p = PowerParams::default();
        let rot = |u: Vec3| Vec3::new(u.x * theta.cos() - u.y * theta.sin(), u.x * theta.sin() + u.y * theta.cos(), 0.0);
        let (v, a) = (Vec3::new(vx, vy, 0.0), Vec3::new(ax, ay, 0.0));
        let w0 = uav_power(v, a, &p);
        let w1 = uav_power(rot(v), rot(a), &p);
        prop_assert!((w0 - w1).abs() <= 1e-9 * w0.max(1.0));
        prop_assert!(w0 > 0.0);
    }

    #[test]
    fn overlap_splits_conserve(digits in proptest::collection::vec(0usize..3, 6), offsets in proptest::collection::vec(-1e6f64..1e6, 6)) {
        let p = params();
        let geom = SlotGeometry {
            src: Vec3::ZERO,
            dst: Vec3::from_km(4000.0, 4000.0, 0.0),
            lane1: (0..3).map(|i| Vec3::from_km(0.0, -1000.0 + 1977.0 * i as f64, 550.0)).collect(),
            lane2: (0..3).map(|i| Vec3::from_km(4000.0, -1000.0 + 1977.0 * i as f64, 550.0)).collect(),
        };
        let relays: Vec<Vec3> = offsets.chunks(2).map(|c| Vec3::new(2e6 + c[0], 2e6 + c[1], 5e4)).collect();
        let assoc = AssociationMatrix::new(
            digits.chunks(2).map(|c| ntn_marl::network::Association::new(c[0], c[1])).collect(),
        );
        let paths = evaluate_paths(&geom, &relays, &assoc, &p).unwrap();
        for sat in 0..3 {
            let users: Vec<usize> = (0..3).filter(|&j| assoc.per_agent[j].lane1 == sat).collect();
            if users.is_empty() {
                continue;
            }
            let full = hybrid_rate(geom.lane1[sat].distance(geom.src), &p).unwrap().0;
            let total: f64 = users.iter().map(|&j| paths[j].capacities[0]).sum();
            prop_assert!((total - full).abs() <= 1e-9 * full);
        }
        for path in &paths {
            prop_assert!(path.rates.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(path.e2e, path.capacities.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }

    #[test]
    fn sampled_actions_always_decode(logits in proptest::collection::vec(-1e3f64..1e3, 28), seed in any::<u64>()) {
        let space = ActionSpace::new(3, 5, 5.0);
        let heads = space.head_sizes();
        let probs = head_probabilities(&logits, &heads).unwrap();
        let mut offset = 0;
        for h in heads {
            let s: f64 = probs[offset..offset + h].iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-6);
            offset += h;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..8 {
            let a = sample(&probs, &heads, &mut rng);
            let action = space.decode([a[0], a[1], a[2], a[3]]).unwrap();
            prop_assert!(action.accel.x.abs() <= 5.0 && action.accel.y.abs() <= 5.0);
        }
    }

    #[test]
    fn reward_monotone(rate in 0.0f64..1e6, energy in 0.0f64..1e5, d in 0.0f64..5e6, bump in 1.0f64..1e5) {
        let w = weights();
        let r = reward_best_effort(rate, energy, &[d], &w);
        prop_assert!(reward_best_effort(rate + bump, energy, &[d], &w) > r);
        prop_assert!(reward_best_effort(rate, energy + bump, &[d], &w) < r);
        let far = reward_best_effort(rate, energy, &[d + bump], &w);
        if d + bump <= w.d_max {
            prop_assert_eq!(far, r);
        } else {
            prop_assert!(far < r);
        }
    }

    #[test]
    fn advantages_telescope(rewards in proptest::collection::vec(-5.0f64..5.0, 1..40), values in proptest::collection::vec(-10.0f64..10.0, 40)) {
        // with gamma = 1, sum of TD errors = return - V(s_0)
        let n = rewards.len();
        let total: f64 = (0..n)
            .map(|t| advantage(rewards[t], 1.0, values[t], if t + 1 < n { values[t + 1] } else { 0.0 }, t + 1 == n))
            .sum();
        let ret: f64 = rewards.iter().sum();
        prop_assert!((total - (ret - values[0])).abs() < 1e-9);
    }
}
