use proptest::prelude::*;
use thinpart::catalog::{cylinder_spectrum, parse_rational, BcPair, Rational};
use thinpart::discretization::{
    assemble, deck_permutation, lift_to_cover, restrict_to_subdomain, DomainSpec, Grid, Profile,
};
use thinpart::eigen::{clusters, lowest_eigenpairs, EigenOptions};
use thinpart::nodal::{connected_components, nodal_domains, DEFAULT_DEAD_BAND};
use thinpart::partition::equal_sectors;

fn bc_pair() -> impl Strategy<Value = BcPair> {
    prop_oneof![Just(BcPair::NN), Just(BcPair::ND), Just(BcPair::DN), Just(BcPair::DD)]
}

fn domain() -> impl Strategy<Value = DomainSpec> {
    (0.05f64..1.5, 1u32..=2, bc_pair(), any::<bool>(), -0.3f64..0.3).prop_map(|(b, degree, bc, annulus, wobble)| {
        if annulus {
            let b = b.min(0.4);
            DomainSpec::annulus(b, Profile::fourier(vec![0.0]), Profile::fourier(vec![1.0, wobble]), degree, bc)
        } else {
            DomainSpec::strip(b, degree, bc)
        }
    })
}

fn grid() -> impl Strategy<Value = Grid> {
    (domain(), 2usize..=6, 2usize..=8).prop_map(|(d, quarter, nt)| Grid::new(d, 4 * quarter, nt).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operators_are_exactly_symmetric(g in grid()) {
        let op = assemble(&g, g.domain.bc);
        for (i, j, v) in op.entries() {
            prop_assert_eq!(op.entry(j, i).to_bits(), v.to_bits());
        }
    }

    #[test]
    fn neumann_kills_constants(g in grid()) {
        let op = assemble(&g, BcPair::NN);
        let ones = vec![1.0; op.dim()];
        let mut y = vec![0.0; op.dim()];
        op.apply_stiffness(&ones, &mut y);
        let diag = (0..op.dim()).map(|i| op.entry(i, i)).fold(0.0, f64::max);
        prop_assert!(y.iter().all(|v| v.abs() <= 16.0 * f64::EPSILON * diag));
    }

    #[test]
    fn spectrum_is_increasing_with_consistent_multiplicity(
        p in 1i64..40, q in 1i64..40, degree in 1u32..=2, bc in bc_pair(), count in 1usize..30,
    ) {
        let b = Rational::new(p, q);
        let entries = cylinder_spectrum(b, degree, bc, count).unwrap();
        prop_assert!(entries.windows(2).all(|w| w[0].value_over_pi2 < w[1].value_over_pi2));
        let total: u32 = entries.iter().map(|e| e.multiplicity).sum();
        prop_assert!(total as usize >= count);
        for e in &entries {
            let from_modes: u32 = e.modes.iter().map(|&(m, _)| if m == 0 { 1 } else { 2 }).sum();
            prop_assert_eq!(e.multiplicity, from_modes);
        }
        // Dropping the last entry must leave fewer than `count` values.
        prop_assert!(((total - entries.last().unwrap().multiplicity) as usize) < count);
    }

    #[test]
    fn decimal_and_fraction_parse_agree(p in 1i64..1000) {
        let decimal = format!("{}.{:03}", p / 1000, p % 1000);
        prop_assert_eq!(parse_rational(&decimal).unwrap(), Rational::new(p, 1000));
        prop_assert_eq!(parse_rational(&format!("{p}/1000")).unwrap(), Rational::new(p, 1000));
    }

    #[test]
    fn negating_a_field_flips_signs_only(
        a in -1.0f64..1.0, c in -1.0f64..1.0, m in 1u32..4, n in 0u32..3, half in 4usize..20, nt in 3usize..12,
    ) {
        let b = 0.3;
        let g = Grid::new(DomainSpec::strip(b, 1, BcPair::NN), 2 * half, nt).unwrap();
        let u = g.sample(|x, y| {
            let w = 2.0 * std::f64::consts::PI * f64::from(m) * x;
            (a * w.cos() + c * w.sin()) * (std::f64::consts::PI * f64::from(n) * y / b).cos() + 0.1 * a * c
        });
        prop_assume!(u.iter().any(|v| v.abs() > 1e-3));
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        let p = nodal_domains(&u, &g, DEFAULT_DEAD_BAND).unwrap();
        let q = nodal_domains(&neg, &g, DEFAULT_DEAD_BAND).unwrap();
        prop_assert_eq!(p.count, q.count);
        prop_assert_eq!(&p.labels, &q.labels);
        for (s, t) in p.signs.iter().zip(&q.signs) {
            prop_assert_eq!(s.flip(), *t);
        }
    }

    #[test]
    fn lifted_fields_are_deck_invariant(half in 4usize..15, nt in 2usize..8, seed in any::<u64>()) {
        let base = Grid::new(DomainSpec::strip(0.2, 1, BcPair::NN), 2 * half, nt).unwrap();
        let cover = base.with_degree(2).unwrap();
        let values: Vec<u64> = (0..base.ncells() as u64).map(|c| c.wrapping_mul(seed | 1)).collect();
        let lifted = lift_to_cover(&base, &cover, &values).unwrap();
        let deck = deck_permutation(&cover).unwrap();
        for c in 0..cover.ncells() {
            prop_assert_eq!(lifted[deck[c]], lifted[c]);
            prop_assert_eq!(deck[deck[c]], c);
        }
    }

    #[test]
    fn clusters_tile_the_index_range(mut values in prop::collection::vec(0.0f64..100.0, 1..20)) {
        values.sort_by(f64::total_cmp);
        let groups = clusters(&values, 1e-3);
        prop_assert_eq!(groups.first().unwrap().start, 0);
        prop_assert_eq!(groups.last().unwrap().end, values.len());
        prop_assert!(groups.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn equal_sectors_are_connected_and_balanced(k in 2usize..7, half in 7usize..30, nt in 2usize..6) {
        let g = Grid::new(DomainSpec::strip(0.2, 1, BcPair::NN), 2 * half, nt).unwrap();
        let labels = equal_sectors(&g, k);
        let (_, pieces) = connected_components(&g, |c| Some(labels[c]));
        prop_assert_eq!(pieces, k);
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= nt);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn groundstate_energy_drops_when_the_mask_grows(seed in any::<u64>(), keep in 0.5f64..0.95) {
        use rand::{Rng, SeedableRng};
        let g = Grid::new(DomainSpec::strip(0.25, 1, BcPair::NN), 24, 6).unwrap();
        let op = assemble(&g, BcPair::NN);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let i0 = rng.random_range(0..24);
        let w = rng.random_range(4..16);
        let outer: Vec<bool> = (0..g.ncells()).map(|c| (g.coords(c).0 + 24 - i0) % 24 < w).collect();
        let inner: Vec<bool> = outer.iter().map(|&m| m && rng.random_bool(keep)).collect();
        prop_assume!(inner.iter().any(|&m| m));
        let opts = EigenOptions::default();
        let lambda = |mask: &[bool]| {
            let sub = restrict_to_subdomain(&op, &g, mask).unwrap();
            lowest_eigenpairs(&sub, 1, &opts).unwrap()[0].value
        };
        prop_assert!(lambda(&inner) >= lambda(&outer) * (1.0 - 1e-9));
    }
}
