use std::sync::OnceLock;

use fracheat::construct::{build_lq_ball_layers, realize};
use fracheat::criteria::{envelope_F, DichotomyParams};
use fracheat::dirichlet::DirichletOperator;
use fracheat::engine::SpectralEngine;
use fracheat::growth::GrowthFunction;
use fracheat::kernel::{stable_kernel, KernelParams};
use fracheat::mesh::{Field, Grid1D, TorusGrid};
use fracheat::mild::{solve, NonlinearProblem};
use fracheat::periodic::PeriodicOperator;
use fracheat::scenario::{Experiment, ScenarioConfig};
use proptest::prelude::*;

const NODES: usize = 48;

fn dirichlet() -> &'static DirichletOperator {
    static OP: OnceLock<DirichletOperator> = OnceLock::new();
    OP.get_or_init(|| DirichletOperator::assemble(Grid1D::new(1.0, NODES).unwrap(), 1.5).unwrap())
}

fn periodic() -> &'static PeriodicOperator {
    static OP: OnceLock<PeriodicOperator> = OnceLock::new();
    OP.get_or_init(|| PeriodicOperator::assemble(TorusGrid::new(2.0, 64).unwrap(), 1.3).unwrap())
}

fn field(values: Vec<f64>) -> Field {
    Field::new(dirichlet().grid(), values).unwrap()
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64, 0.0..100.0f64], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_keeps_fields_nonnegative(v in nonneg(NODES), t in 1e-5..2.0f64) {
        let u = field(v);
        let s = dirichlet().propagate(t, &u).unwrap();
        prop_assert!(s.min_value() >= 0.0);
    }

    #[test]
    fn semigroup_contracts_l1(v in nonneg(NODES), t in 1e-5..2.0f64) {
        let u = field(v);
        let s = dirichlet().propagate(t, &u).unwrap();
        prop_assert!(s.norm(1.0) <= u.norm(1.0) * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn semigroup_preserves_order(v in nonneg(NODES), w in nonneg(NODES), t in 1e-5..1.0f64) {
        let lo = field(v.clone());
        let hi = field(v.iter().zip(&w).map(|(a, b)| a + b).collect());
        let a = dirichlet().propagate(t, &lo).unwrap();
        let b = dirichlet().propagate(t, &hi).unwrap();
        let tol = 1e-12 * (1.0 + hi.max_value());
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| *x <= y + tol));
    }

    #[test]
    fn periodic_flow_conserves_mass(v in nonneg(64), t in 1e-4..5.0f64) {
        let u = Field::new(periodic().grid(), v).unwrap();
        let s = periodic().propagate(t, &u).unwrap();
        let (m0, m1) = (u.values.iter().sum::<f64>(), s.values.iter().sum::<f64>());
        prop_assert!((m0 - m1).abs() <= 1e-10 * (1.0 + m0));
    }

    #[test]
    fn kernel_scaling_is_coherent(alpha in 1.05..1.95f64, t in 0.05..20.0f64, z in 0.0..3.0f64) {
        let params = KernelParams::new(alpha, 1).unwrap();
        let r = z * t.powf(1.0 / alpha);
        let lhs = stable_kernel(t, r, params).unwrap();
        let rhs = t.powf(-1.0 / alpha) * stable_kernel(1.0, z, params).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-8);
    }

    #[test]
    fn envelope_dominates_ratio_and_grows(p in 2.0..4.0f64, gamma in -2.0..2.0f64, s in 1.0..1e6f64, k in 1.0..100.0f64) {
        let f = GrowthFunction::power_log(1.0, p, gamma).unwrap();
        let a = envelope_F(&f, s).unwrap();
        let b = envelope_F(&f, s * k).unwrap();
        prop_assert!(a >= f.eval(s) / s * (1.0 - 1e-12));
        prop_assert!(b >= a * (1.0 - 1e-12));
    }

    #[test]
    fn growth_spec_round_trips(a in 0.1..10.0f64, p in 3.0..5.0f64, gamma in -3.0..3.0f64) {
        let f = GrowthFunction::power_log(a, p, gamma).unwrap();
        prop_assert_eq!(GrowthFunction::parse(&f.spec_string()).unwrap(), f);
    }

    #[test]
    fn config_round_trips(alpha in 1.01..2.0f64, n in 10usize..2000, ks in prop::collection::vec(1usize..20, 1..5),
                          grid in prop::collection::vec(1e-6..1e3f64, 0..4), strict in any::<bool>()) {
        let mut cfg = ScenarioConfig::new(Experiment::Counterexample);
        cfg.alpha = Some(alpha);
        cfg.n = Some(n);
        cfg.k_list = Some(ks);
        cfg.t_grid = Some(grid);
        cfg.strict = Some(strict);
        cfg.f = Some("powerlog:1,6,0+powerlog:2,1,0".into());
        prop_assert_eq!(&ScenarioConfig::parse(&cfg.to_flat()).unwrap(), &cfg);
        prop_assert_eq!(&ScenarioConfig::parse(&cfg.to_json()).unwrap(), &cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solutions_are_ordered_and_above_linear_flow(v in nonneg(NODES), w in nonneg(NODES)) {
        let f = GrowthFunction::power(2.0);
        let small: Vec<f64> = v.iter().map(|x| x * 0.01).collect();
        let big: Vec<f64> = small.iter().zip(&w).map(|(a, b)| a + 0.01 * b).collect();
        let run = |values: Vec<f64>| {
            let p = NonlinearProblem::new(dirichlet(), f.clone(), field(values), 2.0, 0.05, 5e-3).unwrap();
            solve(&p).unwrap()
        };
        let (a, b) = (run(small.clone()), run(big));
        let (ua, ub) = (a.final_field.unwrap(), b.final_field.unwrap());
        prop_assert!(ua.values.iter().zip(&ub.values).all(|(x, y)| *x <= y + 1e-10));
        let lin = dirichlet().propagate(0.05, &field(small)).unwrap();
        prop_assert!(ua.values.iter().zip(&lin.values).all(|(x, y)| *x >= y - 1e-10));
    }
}

#[test]
fn truncations_are_nested() {
    let params = DichotomyParams::new(2.0, 1.5, 1).unwrap();
    let f = GrowthFunction::power(6.0);
    let grid = Grid1D::new(0.75, 1499).unwrap();
    let fields: Vec<Field> =
        (1..=3).map(|k| realize(&build_lq_ball_layers(&f, &params, k, None, 0.2, 0.75).unwrap(), grid).unwrap()).collect();
    for pair in fields.windows(2) {
        assert!(pair[0].values.iter().zip(&pair[1].values).all(|(a, b)| a <= b));
    }
    for (k, u) in fields.iter().enumerate() {
        let spec = build_lq_ball_layers(&f, &params, k + 1, None, 0.2, 0.75).unwrap();
        assert!(u.norm(2.0) <= 1.1 * spec.norm_bound, "K = {}: {} vs {}", k + 1, u.norm(2.0), spec.norm_bound);
    }
}
