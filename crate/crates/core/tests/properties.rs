//! Invariants that span whole computations, as property tests.

use std::f64::consts::PI;

use proptest::prelude::*;
use renyi_core::disk_multipole::{renyi2_two_disks_asymptotic, renyi2_two_disks_by_bc, translation_matrix};
use renyi_core::halfspace::{first_reflection_halfspaces, kernel_c, second_reflection_halfspaces};
use renyi_core::worldline::{inequality_suite, PlanarRegion};
use renyi_core::{BoundaryCondition, DiskPairGeometry, HalfSpacePairGeometry, MultipoleIndex, QuadratureSpec, SamplingParams};

const MONO: MultipoleIndex = MultipoleIndex { n: 0, m: 0 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_disk_information_is_positive_and_decreasing(r1 in 2.05f64..40.0, gap in 0.05f64..20.0) {
        let near = renyi2_two_disks_by_bc(DiskPairGeometry::new(r1).unwrap(), 8).unwrap();
        let far = renyi2_two_disks_by_bc(DiskPairGeometry::new(r1 + gap).unwrap(), 8).unwrap();
        prop_assert!(far.total > 0.0 && near.total > far.total);
        prop_assert!(near.neumann <= near.dirichlet && far.neumann <= far.dirichlet);
        prop_assert!(far.neumann >= 0.0);
    }

    #[test]
    fn monopole_translation_is_arcsin(r in 2.05f64..100.0) {
        let g = DiskPairGeometry::new(r).unwrap();
        let u = translation_matrix(g.xi0(), 0.0, PI / 2.0, 0).unwrap().get(MONO, MONO);
        prop_assert!((u.re - (1.0 / r).asin()).abs() < 1e-13 && u.im.abs() < 1e-15);
    }

    #[test]
    fn kernels_are_bounded(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let d = kernel_c(BoundaryCondition::Dirichlet, a, b);
        let n = kernel_c(BoundaryCondition::Neumann, a, b);
        prop_assert!(d > 0.0 && d <= 1.0 / (2.0 * PI) + 1e-16);
        prop_assert!(n.abs() <= 1.0 / (2.0 * PI) + 1e-16);
        let diag = kernel_c(BoundaryCondition::Neumann, a, a);
        prop_assert!((diag - (1.0 / a.cosh() - 1.0) / (4.0 * PI)).abs() < 1e-16);
    }
}

#[test]
fn asymptotic_residual_is_sixth_order() {
    // (I2 - leading - subleading) r^6 stays bounded as r grows
    let scaled: Vec<f64> = [10.0, 20.0, 40.0, 80.0]
        .iter()
        .map(|&r| {
            let g = DiskPairGeometry::new(r).unwrap();
            (renyi2_two_disks_by_bc(g, 8).unwrap().total - renyi2_two_disks_asymptotic(g)) * r.powi(6)
        })
        .collect();
    for w in scaled.windows(2) {
        assert!((w[1] - w[0]).abs() < 0.25 * w[0].abs().max(1.0), "{scaled:?}");
    }
    assert!(scaled.iter().all(|v| v.abs() < 10.0), "{scaled:?}");
}

#[test]
fn half_space_scaling_and_reflection_hierarchy() {
    let quad = QuadratureSpec::default();
    let unit = first_reflection_halfspaces(HalfSpacePairGeometry::new(1.0).unwrap(), &quad).unwrap();
    for &l in &[0.5, 2.0, 5.0] {
        let g = HalfSpacePairGeometry::new(l).unwrap();
        let first = first_reflection_halfspaces(g, &quad).unwrap();
        assert!(((l * first - unit) / unit).abs() < 1e-12);
        let second = second_reflection_halfspaces(g, &quad).unwrap();
        assert!(second.abs() < first.abs() / 5.0);
    }
}

#[test]
fn half_space_quadrature_is_cutoff_stable() {
    let g = HalfSpacePairGeometry::new(1.0).unwrap();
    let base = QuadratureSpec::default();
    let wider = QuadratureSpec { alpha_cutoff: base.alpha_cutoff + 5.0, ..base };
    for f in [first_reflection_halfspaces, second_reflection_halfspaces] {
        let (a, b) = (f(g, &base).unwrap(), f(g, &wider).unwrap());
        assert!(((a - b) / a).abs() < 1e-6, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn worldline_counting_dominance_is_exact(
        gap_ab in 0.3f64..3.0, gap_bc in 0.3f64..3.0, rb in 0.3f64..2.0, offset in -1.0f64..1.0, seed in 0u64..1000,
    ) {
        let a = PlanarRegion::disk([0.0, 0.0], 1.0).unwrap();
        let bx = 1.0 + gap_ab + rb;
        let b = PlanarRegion::disk([bx, offset], rb).unwrap();
        let c = PlanarRegion::disk([bx + rb + gap_bc + 0.5, 0.0], 0.5).unwrap();
        let params = SamplingParams { loops_per_stratum: 8, placements_per_loop: 16, n_points: 128, n_strata: 6, seed, ..Default::default() };
        let rep = inequality_suite(&a, &b, &c, &params).unwrap();
        prop_assert_eq!(rep.pointwise_violations, 0);
        prop_assert!(rep.all_passed());
        prop_assert!(rep.mutual_ab.neumann.mean <= rep.mutual_ab.dirichlet.mean);
    }
}
