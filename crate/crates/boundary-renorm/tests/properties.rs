use approx::assert_relative_eq;
use boundary_renorm::experiments::{fit_log_slope, parse_eps_ladder};
use boundary_renorm::geometry::{Domain, Frame, Grid};
use boundary_renorm::io::fmt_f64;
use boundary_renorm::kernels::{eval_cube_kernel, KernelKind};
use boundary_renorm::noise::sample_white_noise_3d;
use boundary_renorm::renorm::{scrj_closed, Target};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_fit_recovers_exact_lines(slope in -5.0f64..5.0, icpt in -5.0f64..5.0, k0 in 1i32..4, len in 3usize..7) {
        let x: Vec<f64> = (0..len).map(|i| 2f64.powi(-(k0 + i as i32))).collect();
        let v: Vec<f64> = x.iter().map(|a| slope * a.ln() + icpt).collect();
        let fit = fit_log_slope(&x, &v).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - icpt).abs() < 1e-9);
        prop_assert!(fit.stderr < 1e-9);
    }

    #[test]
    fn ladder_ranges_expand_to_halvings(lo in 0i32..6, len in 0i32..6) {
        let hi = lo + len;
        let v = parse_eps_ladder(&format!("2^-{lo}..2^-{hi}")).unwrap();
        prop_assert_eq!(v.len() as i32, len + 1);
        for (i, e) in v.iter().enumerate() {
            prop_assert_eq!(*e, 2f64.powi(-(lo + i as i32)));
        }
    }

    #[test]
    fn formatted_floats_parse_back_exactly(v in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let back: f64 = fmt_f64(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn targets_parse_from_numbers(b in -1e6f64..1e6) {
        prop_assert_eq!(b.to_string().parse::<Target>().unwrap(), Target::Finite(b));
    }

    #[test]
    fn overlap_closed_form_is_symmetric(a in 0.01f64..10.0, b in 0.01f64..10.0) {
        prop_assume!((a - b).abs() > 1e-6);
        assert_relative_eq!(scrj_closed(a, b).unwrap(), scrj_closed(b, a).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn canonical_coordinates_invert(x in prop::array::uniform3(-0.99f64..0.99)) {
        let d = Domain::new(1.0, Frame::Spatial3).unwrap();
        let (q, tag) = d.canonicalize_to_q(&x).unwrap();
        prop_assert!(0.0 <= q[2] && q[2] <= q[0] && q[0] <= q[1]);
        let back = tag.apply_inverse(&q, 1.0);
        for i in 0..3 {
            prop_assert!((back[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn robin_cube_kernel_is_symmetric_in_space(
        x in prop::array::uniform3(-0.9f64..0.9),
        y in prop::array::uniform3(-0.9f64..0.9),
        t in 0.01f64..0.5,
        a in 0.1f64..10.0,
    ) {
        let k1 = eval_cube_kernel(KernelKind::CubeRobin, a, &[t, x[0], x[1], x[2]], &[0.0, y[0], y[1], y[2]], 2).unwrap();
        let k2 = eval_cube_kernel(KernelKind::CubeRobin, a, &[t, y[0], y[1], y[2]], &[0.0, x[0], x[1], x[2]], 2).unwrap();
        prop_assert!((k1 - k2).abs() <= 1e-10 * (1.0 + k1.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn noise_depends_on_seed_not_padding(seed in any::<u64>(), pad in 1usize..4) {
        let g = Grid::new(6, 1.0).unwrap();
        let a = sample_white_noise_3d(&g, 0, seed).interior();
        let b = sample_white_noise_3d(&g, pad, seed).interior();
        prop_assert_eq!(&a.data, &b.data);
        let c = sample_white_noise_3d(&g, 0, seed.wrapping_add(1)).interior();
        prop_assert!(a.data.iter().zip(&c.data).any(|(u, v)| u != v));
    }
}
