use ecb_pricing::model::{Intensity, Volatility};
use ecb_pricing::pde::{Grid, IntervalSolver, JumpWeights, Lattice};
use ecb_pricing::recursion::{apply_b, InflationGrid, Quadrature};
use ecb_pricing::simulator::{pairwise_sum, path_rng, simulate_path, InitialState};
use ecb_pricing::ModelParams;
use proptest::prelude::*;

fn rate() -> impl Strategy<Value = f64> {
    // Strictly inside (0.05, 4.25).
    0.0501f64..4.2499
}

proptest! {
    #[test]
    fn jump_law_is_a_distribution_on_admissible_sizes(pi in -5.0f64..8.0, r in rate()) {
        let p = ModelParams::reference();
        let q = p.q_probs(pi, r).unwrap();
        let m = p.jumps.m as i32;
        prop_assert_eq!(q.len(), 2 * m as usize + 1);
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (i, &qk) in q.iter().enumerate() {
            let k = i as i32 - m;
            prop_assert!(qk >= 0.0);
            if !p.jumps.admissible(r, k) {
                prop_assert_eq!(qk, 0.0);
            }
        }
    }

    #[test]
    fn jump_map_lands_inside_the_band(pi in -5.0f64..8.0, r in rate(), u in 0.0f64..1.0) {
        let p = ModelParams::reference();
        let k = p.jump_map(pi, r, u).unwrap();
        prop_assert!(k.unsigned_abs() <= p.jumps.m);
        if k != 0 {
            prop_assert!(p.jumps.contains(r + k as f64 * p.jumps.delta));
        }
    }

    #[test]
    fn b_operator_reproduces_low_moments(pi in -3.0f64..6.0, r in rate(), z in 0.0f64..7.0) {
        let p = ModelParams::reference();
        let quad = Quadrature::gauss_hermite(20).unwrap();
        let mean = p.gamma(pi, r, z);
        let v = p.inflation.v;
        let b1 = apply_b(|_| 1.0, pi, r, z, &p, &quad);
        let bx = apply_b(|x| x, pi, r, z, &p, &quad);
        let bx2 = apply_b(|x| x * x, pi, r, z, &p, &quad);
        prop_assert!((b1 - 1.0).abs() <= 4.0 * f64::EPSILON);
        prop_assert!((bx - mean).abs() <= 1e-14 * mean.abs().max(1.0));
        prop_assert!((bx2 - mean * mean - v * v).abs() <= 1e-10);
    }

    #[test]
    fn inflation_grid_interpolates_affine_functions(a in -3.0f64..3.0, b in -2.0f64..2.0, x in -10.0f64..10.0) {
        let g = InflationGrid::new(-2.0, 6.0, 17).unwrap();
        let got = g.interpolate(x, |i| a + b * g.value(i));
        prop_assert!((got - (a + b * x)).abs() <= 1e-12 * (1.0 + (a + b * x).abs()));
    }

    #[test]
    fn pairwise_sum_matches_naive(xs in proptest::collection::vec(-1e3f64..1e3, 0..200)) {
        let naive: f64 = xs.iter().sum();
        let scale: f64 = xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        prop_assert!((pairwise_sum(&xs) - naive).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_step_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, pi in 0.0f64..3.0) {
        let p = ModelParams::reference();
        let grid = Grid::for_model(&p, 10, 12, 7.0);
        let solver = IntervalSolver::new(&grid, &p).unwrap();
        let jw = JumpWeights::build(&grid, &p, pi);
        let f = Lattice::from_fn(&grid, &p.jumps, pi, |r, z| (-z).exp() + r);
        let g = Lattice::from_fn(&grid, &p.jumps, pi, |r, z| (r * z).sin());
        let mut combo = f.clone();
        combo.axpby(a, b, &g);
        let lhs = solver.step(&combo, &jw).unwrap();
        let mut rhs = solver.step(&f, &jw).unwrap();
        rhs.axpby(a, b, &solver.step(&g, &jw).unwrap());
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn frozen_levels_keep_an_h_constant_datum_flat(c in 0.1f64..3.0, n in 5usize..40) {
        let mut p = ModelParams::reference();
        p.jumps.lambda = Intensity::Constant(0.0);
        p.short_rate.b0 = 2.0;
        p.short_rate.b1 = 0.0;
        let grid = Grid::for_model(&p, n, 20, 7.0);
        let solver = IntervalSolver::new(&grid, &p).unwrap();
        let terminal = Lattice::from_fn(&grid, &p.jumps, 1.0, |_, z| (-c * z).exp());
        let out = solver.solve_interval(&terminal, &JumpWeights::build(&grid, &p, 1.0)).unwrap();
        for h in 2..=out.levels() {
            for (x, y) in out.row(h).iter().zip(out.row(1)) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn simulated_paths_stay_in_band(seed in any::<u64>(), r in 0.30f64..4.05, z in 0.0f64..5.0) {
        let p = ModelParams::reference();
        // Start on a lattice level so the band is reachable exactly.
        let h = ((r - p.jumps.r_lo) / p.jumps.delta).round();
        let start = InitialState { pi: 1.52, r: p.jumps.r_lo + h * p.jumps.delta, z };
        let mut rng = path_rng(seed, 0);
        let path = simulate_path(&p, start, 1.0, 1e-3, &mut rng).unwrap();
        prop_assert!(path.ecb_levels.iter().all(|&x| p.jumps.contains(x)));
        prop_assert!(path.short_rate_samples.iter().all(|&x| x >= 0.0));
        prop_assert_eq!(path.inflation_values.len(), p.inflation.intervals + 1);
        prop_assert_eq!(path.ecb_levels.len(), path.jump_times.len() + 1);
        prop_assert!(path.jump_times.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(path.discount_integral >= 0.0);
    }
}

#[test]
fn deterministic_bond_matches_closed_form_discount() {
    let mut p = ModelParams::reference();
    p.jumps.lambda = Intensity::Constant(0.0);
    p.short_rate.sigma_bar = Volatility::Constant(0.0);
    p.short_rate.b0 = 3.0;
    p.short_rate.b1 = 0.0;
    p.inflation.intervals = 1;
    let grid = Grid::for_model(&p, 200, 70, 7.0);
    let solver = IntervalSolver::new(&grid, &p).unwrap();
    let ones = Lattice::from_fn(&grid, &p.jumps, 0.0, |_, _| 1.0);
    let out = solver.solve_interval(&ones, &JumpWeights::build(&grid, &p, 0.0)).unwrap();
    // dz = k(3 − z)dt, discount exp(−∫z) in percent units.
    let t = p.inflation.theta;
    let k = p.short_rate.k_sh;
    for j in [0usize, 20, 40] {
        let z = grid.z(j);
        let b = (1.0 - (-k * t).exp()) / k;
        let exact = (-(3.0 * (t - b) + z * b)).exp();
        assert!((out.get(3, j) - exact).abs() < 1e-3, "j={j}: {} vs {exact}", out.get(3, j));
    }
}
