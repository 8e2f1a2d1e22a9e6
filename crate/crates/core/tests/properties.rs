use std::f64::consts::PI;

use proptest::prelude::*;

use slabflow::acoustics::{propagate_exact, AcousticState};
use slabflow::cns3d::{self, FluidState3, Params};
use slabflow::diagnostics::{fit_rate, vertical_poincare};
use slabflow::field2::{helmholtz_split, VectorField2};
use slabflow::field3::{ScalarField3, VectorField3};
use slabflow::grid::{Parity, SlabGrid, Torus2};
use slabflow::norms::norm_l2_window;
use slabflow::synth::{random_band_limited, random_solenoidal};
use slabflow::thermo::{ess_res_split, CutoffKappa, GasLaw};

fn torus(n: usize) -> Torus2 {
    Torus2::new(2.0 * PI, n).unwrap()
}

proptest! {
    // scalar-only properties are cheap, run the full default case count

    #[test]
    fn rel_entropy_is_a_bregman_distance(
        coefficient in 0.5f64..3.0,
        gamma in 1.6f64..3.0,
        rho in 0.1f64..5.0,
        r in 0.1f64..5.0,
    ) {
        let law = GasLaw::new(coefficient, gamma).unwrap();
        let h = law.rel_entropy(rho, r).unwrap();
        prop_assert!(h >= -1e-13, "negative gap {h:.3e}");
        prop_assert!(law.rel_entropy(r, r).unwrap().abs() < 1e-13);

        // convexity gives a quadratic floor with the worst curvature on
        // the segment between rho and r
        let lo = rho.min(r);
        let hi = rho.max(r);
        let curv = law
            .potential_curvature(lo)
            .unwrap()
            .min(law.potential_curvature(hi).unwrap());
        let floor = 0.5 * curv * (rho - r) * (rho - r);
        prop_assert!(
            h >= floor - 1e-12 * (1.0 + floor),
            "gap {h:.6e} under quadratic floor {floor:.6e}"
        );
        if (rho - r).abs() > 1e-6 {
            prop_assert!(h > 0.0);
        }
    }

    #[test]
    fn rate_fit_recovers_planted_power_laws(
        slope in -3.0f64..3.0,
        amp in 0.1f64..10.0,
        count in 4usize..9,
        base in 0.2f64..0.9,
    ) {
        let samples: Vec<(f64, f64)> = (1..=count)
            .map(|k| {
                let e = base.powi(k as i32);
                (e, amp * e.powf(slope))
            })
            .collect();
        let fit = fit_rate(&samples).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-8, "slope {} vs {}", fit.slope, slope);
        prop_assert!((fit.intercept - amp.ln()).abs() < 1e-8);
        prop_assert!(fit.rms_residual < 1e-9);
        prop_assert_eq!(fit.count, count);
    }

    #[test]
    fn cutoff_split_partitions_exactly(
        inner in 0.1f64..0.6,
        gap in 0.05f64..0.35,
        amp in 0.05f64..0.4,
        seed in any::<u64>(),
    ) {
        let cutoff = CutoffKappa::new(inner, (inner + gap).min(0.99)).unwrap();
        let g = torus(16);
        let rho = random_band_limited(g, 5, amp, seed).offset(1.0);
        let f = random_band_limited(g, 5, 1.0, seed ^ 0x5bd1_e995);

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in rho.values() {
            let k = cutoff.eval(v);
            lo = lo.min(k);
            hi = hi.max(k);
        }
        prop_assert!(lo >= 0.0 && hi <= 1.0, "kappa left [0,1]: [{lo}, {hi}]");
        prop_assert!((cutoff.eval(1.0) - 1.0).abs() < 1e-15);

        let (ess, res) = ess_res_split(&f, &rho, &cutoff).unwrap();
        let defect = ess.add(&res).sub(&f).max_abs();
        prop_assert!(defect < 1e-14, "parts recombine with defect {defect:.3e}");
    }

    #[test]
    fn window_norm_grows_with_the_window(
        seed in any::<u64>(),
        amp in 0.1f64..3.0,
        f1 in 0.1f64..1.0,
        f2 in 0.1f64..1.0,
    ) {
        let f = random_band_limited(torus(24), 7, amp, seed);
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let a = norm_l2_window(&f, lo);
        let b = norm_l2_window(&f, hi);
        prop_assert!(a <= b + 1e-12, "window norm not monotone: {a} > {b}");
        prop_assert!(b <= norm_l2_window(&f, 1.0) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn helmholtz_parts_are_orthogonal_and_complete(
        seed_x in any::<u64>(),
        seed_y in any::<u64>(),
        band in 1usize..10,
        amp in 0.1f64..2.0,
    ) {
        let g = torus(32);
        let v = VectorField2::new(
            random_band_limited(g, band, amp, seed_x),
            random_band_limited(g, band, amp, seed_y),
        )
        .unwrap();
        let scale = v.max_abs().max(1.0);
        let (sol, grad) = helmholtz_split(&v);

        let recombine = sol.add(&grad).sub(&v).max_abs();
        prop_assert!(recombine < 1e-12 * scale);
        prop_assert!(sol.div_h().max_abs() < 1e-9 * scale);
        prop_assert!(grad.curl_h().max_abs() < 1e-9 * scale);

        let cross = sol.dot(&grad).integral().abs();
        prop_assert!(cross < 1e-10 * (1.0 + scale * scale), "cross term {cross:.3e}");

        // projecting a second time must not move either part
        let (sol2, grad2) = helmholtz_split(&grad);
        prop_assert!(sol2.max_abs() < 1e-10 * scale);
        prop_assert!(grad2.sub(&grad).max_abs() < 1e-10 * scale);
        let (sol3, grad3) = helmholtz_split(&sol);
        prop_assert!(grad3.max_abs() < 1e-10 * scale);
        prop_assert!(sol3.sub(&sol).max_abs() < 1e-10 * scale);
    }

    #[test]
    fn acoustic_flow_is_unitary_and_composes(
        seed_p in any::<u64>(),
        seed_q in any::<u64>(),
        eps in 0.05f64..1.0,
        t1 in 0.0f64..3.0,
        t2 in 0.0f64..3.0,
    ) {
        let g = torus(24);
        let psi = random_band_limited(g, 6, 1.0, seed_p);
        let pot = random_band_limited(g, 6, 0.8, seed_q);
        let w0 = AcousticState::from_potentials(&psi, &pot, 0.0).unwrap();
        let a = GasLaw::new(1.0, 2.0).unwrap().sound_speed();

        let e0 = w0.energy(a);
        let w1 = propagate_exact(&w0, t1, eps, a).unwrap();
        prop_assert!((w1.energy(a) - e0).abs() < 1e-11 * (1.0 + e0));

        let via = propagate_exact(&w1, t2, eps, a).unwrap();
        let direct = propagate_exact(&w0, t1 + t2, eps, a).unwrap();
        let gap_psi = via.psi().sub(&direct.psi()).max_abs();
        let gap_u = via.grad_potential().sub(&direct.grad_potential()).max_abs();
        prop_assert!(gap_psi < 1e-10, "flow does not compose: psi gap {gap_psi:.3e}");
        prop_assert!(gap_u < 1e-10, "flow does not compose: velocity gap {gap_u:.3e}");
    }

    #[test]
    fn vertical_deviation_obeys_the_slip_poincare_bound(
        seed in any::<u64>(),
        vertical_modes in 2usize..5,
        thickness in 0.2f64..1.0,
        amp in 0.1f64..1.0,
    ) {
        let g = SlabGrid::new(torus(16), thickness, vertical_modes).unwrap();
        let h0 = random_band_limited(torus(16), 3, amp, seed);
        let h1 = random_band_limited(torus(16), 3, amp, seed ^ 0xdead_beef);
        let h2 = random_band_limited(torus(16), 3, amp, seed ^ 0x0bad_cafe);
        let prof1 = ScalarField3::from_fn(g, Parity::Even, |_, _, z| (PI * z / thickness).cos());
        let prof2 =
            ScalarField3::from_fn(g, Parity::Even, |_, _, z| (2.0 * PI * z / thickness).cos());
        let ux = ScalarField3::lift(g, &h0)
            .unwrap()
            .add(&ScalarField3::lift(g, &h1).unwrap().mul(&prof1));
        let uy = ScalarField3::lift(g, &h2).unwrap().mul(&prof2);
        let u = VectorField3::new(ux, uy, ScalarField3::zeros(g, Parity::Odd)).unwrap();

        let (dev, bound) = vertical_poincare(&u);
        prop_assert!(dev >= 0.0 && bound >= 0.0);
        prop_assert!(
            dev <= bound * (1.0 + 1e-12) + 1e-13,
            "deviation {dev:.6e} above bound {bound:.6e}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn one_step_conserves_mass_and_horizontal_momentum(
        seed_r in any::<u64>(),
        seed_u in any::<u64>(),
        amp in 0.02f64..0.15,
    ) {
        let h = torus(16);
        let g = SlabGrid::new(h, 1.0, 1).unwrap();
        let rho2 = random_band_limited(h, 4, amp, seed_r).offset(1.0);
        let u2 = random_solenoidal(h, 4, amp, seed_u);
        let rho = ScalarField3::lift(g, &rho2).unwrap();
        let u = VectorField3::lift(g, &u2).unwrap();
        let momentum = VectorField3::new(
            rho.mul(u.x()),
            rho.mul(u.y()),
            ScalarField3::zeros(g, Parity::Odd),
        )
        .unwrap();
        let state = FluidState3::new(rho, momentum, 0.0).unwrap();
        let params = Params::new(0.3, 1.0, 0.01, GasLaw::new(1.0, 2.0).unwrap()).unwrap();

        let dt = 0.5 * cns3d::cfl_limit(&state, &params);
        let next = cns3d::step(&state, dt, &params).unwrap();

        let mass0 = state.rho().slab_integral();
        let mass1 = next.rho().slab_integral();
        prop_assert!((mass1 - mass0).abs() < 1e-12 * mass0, "mass drift {:.3e}", mass1 - mass0);

        for (before, after) in [
            (state.momentum().x(), next.momentum().x()),
            (state.momentum().y(), next.momentum().y()),
        ] {
            let drift = (after.slab_integral() - before.slab_integral()).abs();
            prop_assert!(drift < 1e-12 * (1.0 + mass0), "momentum drift {drift:.3e}");
        }
    }
}
