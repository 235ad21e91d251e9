use proptest::prelude::*;

use threebundle_core::analysis::{envelope_gap, xi_brute_force, xi_pruned};
use threebundle_core::ensemble::{compare, ArrowConfig, Comparison};
use threebundle_core::exact::{collect, enumerate, EnumOptions, DEFAULT_CAP};
use threebundle_core::formulas::{curve_se, nu, sigma, zeta, CurveParams};
use threebundle_core::geometry::Quadrant;
use threebundle_core::sampler::{
    cftp_sample, coupled_run, extremal_ensemble, run, ChainState, ClockStream, Dynamics, Side,
};
use threebundle_core::{build_augmented, build_domain, domain_wall_boundary, LatticePoint};

fn small_sizes() -> impl Strategy<Value = (u32, u32, u32)> {
    (0u32..=2, 0u32..=2, 1u32..=2)
}

fn simplex() -> impl Strategy<Value = CurveParams> {
    (0.0f64..1.0, 0.0f64..1.0, 0.05f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        let (a, b) = (a / s, b / s);
        CurveParams::new(a, b, 1.0 - a - b).unwrap()
    })
}

fn up_right_path() -> impl Strategy<Value = Vec<LatticePoint>> {
    prop::collection::vec(any::<bool>(), 1..40).prop_map(|steps| {
        let mut p = LatticePoint::new(0, 0);
        let mut out = vec![p];
        for east in steps {
            if east {
                p.x += 1;
            } else {
                p.y += 1;
            }
            out.push(p);
        }
        out
    })
}

proptest! {
    #[test]
    fn quadrants_cover_the_plane(vx in -20i64..20, vy in -20i64..20, px in -20i64..20, py in -20i64..20) {
        let (v, p) = (LatticePoint::new(vx, vy), LatticePoint::new(px, py));
        prop_assert!(Quadrant::ALL.iter().any(|q| q.contains_lattice(v, p)));
        let both = Quadrant::NE.contains_lattice(v, p) && Quadrant::SW.contains_lattice(v, p);
        prop_assert_eq!(both, p == v);
    }

    #[test]
    fn domains_nest((a, b, c) in small_sizes(), psi in 0u32..3) {
        let small = build_domain(a, b, c).unwrap();
        let big = build_domain(a, b, c + 1).unwrap();
        prop_assert!(small.vertices().all(|v| big.contains(v)));
        let x0 = build_augmented(a, b, c, psi).unwrap();
        let x1 = build_augmented(a, b, c, psi + 1).unwrap();
        prop_assert!(x0.vertices().all(|v| x1.contains(v)));
    }

    #[test]
    fn euler_formula((a, b, c) in small_sizes(), psi in 0u32..3, augmented in any::<bool>()) {
        let d = if augmented { build_augmented(a, b, c, psi) } else { build_domain(a, b, c) }.unwrap();
        let faces = d.faces().len() as i64;
        prop_assert_eq!(d.vertex_count() as i64 - d.internal_edge_count() as i64 + faces, 1);
    }

    #[test]
    fn glauber_keeps_validity_and_restriction((a, b, c) in small_sizes(), seed in any::<u64>(), max in any::<bool>()) {
        let d = build_domain(a, b, c).unwrap();
        let bd = domain_wall_boundary(&d);
        let side = if max { Side::Max } else { Side::Min };
        let mut s = ChainState::new(extremal_ensemble(&d, &bd, a, side).unwrap());
        let dy = Dynamics::new(&d);
        let mut clock = ClockStream::new(seed, dy.n_faces());
        for _ in 0..20 {
            run(&mut s, &dy, 25, &mut clock);
            prop_assert!(s.ensemble.validate_restricted(a).is_ok());
            prop_assert_eq!(s.ensemble.restriction(), a);
        }
    }

    #[test]
    fn ordered_pairs_stay_ordered(i in 0usize..98, j in 0usize..98, seed in any::<u64>()) {
        let d = build_domain(1, 1, 2).unwrap();
        let family = collect(&d, &domain_wall_boundary(&d), 1, DEFAULT_CAP).unwrap();
        let (x, y) = (&family[i], &family[j]);
        let (lo, hi) = match compare(x, y).unwrap() {
            Comparison::Less | Comparison::Equal => (x, y),
            Comparison::Greater => (y, x),
            Comparison::Incomparable => return Ok(()),
        };
        let dy = Dynamics::new(&d);
        let (mut lo, mut hi) = (ChainState::new(lo.clone()), ChainState::new(hi.clone()));
        prop_assert!(coupled_run(&mut lo, &mut hi, &dy, 2000, &mut dy.clock(seed)).is_ok());
    }

    #[test]
    fn cftp_is_deterministic((a, b, c) in small_sizes(), seed in any::<u64>()) {
        let d = build_domain(a, b, c).unwrap();
        let bd = domain_wall_boundary(&d);
        prop_assert_eq!(cftp_sample(&d, &bd, a, seed).unwrap(), cftp_sample(&d, &bd, a, seed).unwrap());
    }

    #[test]
    fn legendre_identity(p in simplex(), z in 0.0f64..100.0) {
        let (x, y) = curve_se(z, &p).unwrap();
        prop_assert!((y - z * x + zeta(z, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn curve_functions_increase(p in simplex(), z in 0.0f64..50.0, dz in 1e-3f64..5.0) {
        prop_assert!(zeta(z + dz, &p).unwrap() > zeta(z, &p).unwrap());
        prop_assert!(sigma(z + dz).unwrap() > sigma(z).unwrap());
        prop_assert!(nu(z + dz, &p).unwrap() >= nu(z, &p).unwrap() - 1e-12);
    }

    #[test]
    fn xi_pruning_is_exact(path in up_right_path()) {
        prop_assert!((xi_brute_force(&path).unwrap() - xi_pruned(&path).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn envelope_inequality(path in up_right_path()) {
        prop_assert!(envelope_gap(&path).unwrap().holds());
    }
}

#[test]
fn compare_is_a_partial_order() {
    let d = build_domain(1, 1, 1).unwrap();
    let family = collect(&d, &domain_wall_boundary(&d), 1, DEFAULT_CAP).unwrap();
    let le = |x, y| matches!(compare(x, y).unwrap(), Comparison::Less | Comparison::Equal);
    for x in &family {
        assert!(le(x, x));
        for y in &family {
            if le(x, y) && le(y, x) {
                assert_eq!(x, y);
            }
            for z in &family {
                if le(x, y) && le(y, z) {
                    assert!(le(x, z));
                }
            }
        }
    }
}

#[test]
fn exit_column_is_the_single_turn_on_the_bottom_row() {
    for (a, b, c) in [(1, 1, 1), (1, 1, 2), (0, 0, 3), (2, 1, 1)] {
        let d = build_domain(a, b, c).unwrap();
        for e in collect(&d, &domain_wall_boundary(&d), a, DEFAULT_CAP).unwrap() {
            let turns: Vec<i64> = (1..=d.width())
                .filter(|&x| e.config_at(LatticePoint::new(x, d.ybot())) == ArrowConfig::WEST_NORTH)
                .collect();
            assert_eq!(turns, vec![e.exit_k().unwrap()]);
        }
    }
}

#[test]
fn histogram_counts_add_up() {
    for (a, b, c) in [(1, 1, 1), (1, 2, 1), (0, 1, 2), (2, 0, 1)] {
        let d = build_domain(a, b, c).unwrap();
        let r = enumerate(&d, &domain_wall_boundary(&d), a, EnumOptions::default()).unwrap();
        let total: num_bigint::BigUint = r.exit_hist.values().sum();
        assert_eq!(total, r.count);
    }
}
