//! Integral H2 of finite groups by the bar resolution, the predicted-H1
//! evaluator for two-factor fibre products over finite quotients, and an
//! independent H1 oracle via Reidemeister-Schreier rewriting.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::GroupError;
use crate::fibre::{FactorMap, FibreSpec, Mode, Quotient};
use crate::intlin::{cokernel, column_echelon, hom_kernel, AbelianGroup, AbelianHom, IntMatrix};
use crate::presentations::{direct_product_presentation, CosetTable, FiniteGroup};

/// Size bound for h2_finite; the bar complex has |Q|^3 columns.
pub const MAX_H2_ORDER: usize = 16;

/// Boundary C2 -> C1 of the inhomogeneous bar complex:
/// d[g|h] = [h] - [gh] + [g].
fn bar_d2(q: &FiniteGroup) -> IntMatrix {
    let n = q.order();
    let mut m = IntMatrix::zeros(n, n * n);
    for g in 0..n {
        for h in 0..n {
            let col = g * n + h;
            let mut bump = |row: usize, delta: i64| {
                let v = m.get(row, col) + BigInt::from(delta);
                m.set(row, col, v);
            };
            bump(h, 1);
            bump(q.mul(g, h), -1);
            bump(g, 1);
        }
    }
    m
}

/// Boundary C3 -> C2: d[g|h|k] = [h|k] - [gh|k] + [g|hk] - [g|h].
fn bar_d3(q: &FiniteGroup) -> IntMatrix {
    let n = q.order();
    let mut m = IntMatrix::zeros(n * n, n * n * n);
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                let col = (g * n + h) * n + k;
                let mut bump = |row: usize, delta: i64| {
                    let v = m.get(row, col) + BigInt::from(delta);
                    m.set(row, col, v);
                };
                bump(h * n + k, 1);
                bump(q.mul(g, h) * n + k, -1);
                bump(g * n + q.mul(h, k), 1);
                bump(g * n + h, -1);
            }
        }
    }
    m
}

/// Integral H2 of a finite group: ker d2 / im d3 on the bar complex,
/// returned in invariant-factor form (always pure torsion).
pub fn h2_finite(q: &FiniteGroup) -> Result<AbelianGroup, GroupError> {
    let n = q.order();
    if n > MAX_H2_ORDER {
        return Err(GroupError::OrderBound {
            order: n,
            bound: MAX_H2_ORDER,
        });
    }
    let d2 = bar_d2(q);
    let d3 = bar_d3(q);

    let kernel = column_echelon(&d2).kernel_basis();
    if kernel.is_empty() {
        return Ok(AbelianGroup::trivial());
    }
    let kdim = kernel.len();
    let mut kmat = IntMatrix::zeros(n * n, kdim);
    for (j, v) in kernel.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            kmat.set(i, j, x.clone());
        }
    }
    let kech = column_echelon(&kmat);

    // coordinates of each boundary 3-cell in the kernel basis
    let mut coords = IntMatrix::zeros(kdim, d3.cols());
    for c in 0..d3.cols() {
        let z = kech
            .solve(&d3.column(c))
            .expect("boundaries lie in the cycle lattice");
        for (i, x) in z.iter().enumerate() {
            coords.set(i, c, x.clone());
        }
    }

    // prune to a column basis of the image before the final SNF
    let ech = column_echelon(&coords);
    let rank = ech.rank();
    let mut relators = IntMatrix::zeros(rank, kdim);
    for r in 0..rank {
        for i in 0..kdim {
            relators.set(r, i, ech.h.get(i, r).clone());
        }
    }
    let (h2, _) = cokernel(&relators);
    Ok(h2)
}

/// Abelianization of a finite group together with the projection from the
/// free lattice on its elements: cokernel of the relations
/// e_g + e_h - e_{gh}.
pub fn finite_abelianization(q: &FiniteGroup) -> (AbelianGroup, AbelianHom) {
    let n = q.order();
    let mut rel = IntMatrix::zeros(n * n, n);
    for g in 0..n {
        for h in 0..n {
            let row = g * n + h;
            let mut bump = |col: usize, delta: i64| {
                let v = rel.get(row, col) + BigInt::from(delta);
                rel.set(row, col, v);
            };
            bump(g, 1);
            bump(h, 1);
            bump(q.mul(g, h), -1);
        }
    }
    cokernel(&rel)
}

fn require_finite_pullback(spec: &FibreSpec) -> Result<&FiniteGroup, GroupError> {
    if spec.factors.len() != 2 || spec.mode != Mode::Pullback {
        return Err(GroupError::Invalid(
            "two-factor pullback required".into(),
        ));
    }
    match &spec.quotient {
        Quotient::Finite(q) => Ok(q),
        _ => Err(GroupError::Invalid(
            "finite quotient required; infinite quotients have no oracle pathway".into(),
        )),
    }
}

/// Predicted H1 of the fibre product over a finite quotient:
/// Z^{rank of the second factor} + H2(Q) + ker(H1(first factor) -> H1(Q)).
pub fn predicted_h1(spec: &FibreSpec) -> Result<AbelianGroup, GroupError> {
    let q = require_finite_pullback(spec)?;
    let FactorMap::Finite(im0) = &spec.maps[0] else {
        unreachable!()
    };
    let r1 = spec.factors[0].rank() as usize;
    let r2 = spec.factors[1].rank() as usize;

    let h2 = h2_finite(q)?;

    let (qab, proj) = finite_abelianization(q);
    let mut induced = IntMatrix::zeros(qab.dim(), r1);
    for (i, &g) in im0.iter().enumerate() {
        let mut e = vec![BigInt::zero(); q.order()];
        e[g] = BigInt::one();
        for (row, x) in proj.apply(&e).iter().enumerate() {
            induced.set(row, i, x.clone());
        }
    }
    let hom = AbelianHom::new(AbelianGroup::free(r1), qab, induced)?;
    let (kernel, _) = hom_kernel(&hom)?;

    Ok(AbelianGroup::free(r2 + kernel.rank()).direct_sum(&h2))
}

/// Direct H1 computation for finite abelian quotients: rewrite the fibre
/// product as the kernel of the difference homomorphism (u, v) -> p1(u) -
/// p2(v) on the full direct product, build its index-|Q| coset table,
/// apply Reidemeister-Schreier, and abelianize. Nonabelian quotients are
/// refused: the difference map is only a homomorphism when Q is abelian.
pub fn h1_oracle(spec: &FibreSpec) -> Result<AbelianGroup, GroupError> {
    let q = require_finite_pullback(spec)?;
    if !q.is_abelian() {
        return Err(GroupError::Invalid(
            "the difference-homomorphism oracle requires an abelian quotient".into(),
        ));
    }
    let (FactorMap::Finite(im0), FactorMap::Finite(im1)) = (&spec.maps[0], &spec.maps[1]) else {
        unreachable!()
    };
    let pres = direct_product_presentation(&[
        crate::presentations::FinPresentation::free(spec.factors[0].rank()),
        crate::presentations::FinPresentation::free(spec.factors[1].rank()),
    ]);
    let n = q.order();
    let rank = pres.alphabet.rank() as usize;
    let mut table = vec![vec![0usize; rank]; n];
    for (c, row) in table.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let g = if j < im0.len() {
                im0[j]
            } else {
                q.inv(im1[j - im0.len()])
            };
            *slot = q.mul(c, g);
        }
    }
    let cosets = CosetTable::new(rank as u32, table)?;
    let sub = crate::presentations::reidemeister_schreier(&pres, &cosets)?;
    Ok(sub.abelianize().0)
}

/// Finite-generation criterion report for H1 of a fibre product: H1 of the
/// product is finitely generated exactly when H2 of the quotient is. For
/// finite quotients both sides are computed; for infinite quotients the
/// caller supplies recorded H2 data and the report states the implication
/// without computing the infinite side.
#[derive(Clone, Debug)]
pub struct H1FinitenessReport {
    pub quotient_h2: Option<AbelianGroup>,
    pub h1_finitely_generated: Option<bool>,
    pub computed: bool,
}

pub fn h1_finiteness_report(
    spec: &FibreSpec,
    recorded_h2: Option<AbelianGroup>,
) -> H1FinitenessReport {
    if let Quotient::Finite(q) = &spec.quotient {
        let h2 = h2_finite(q).ok();
        return H1FinitenessReport {
            quotient_h2: h2,
            h1_finitely_generated: Some(true),
            computed: true,
        };
    }
    // an AbelianGroup value is finitely generated by construction, so
    // recorded H2 data settles the criterion affirmatively
    let fg = recorded_h2.as_ref().map(|_| true);
    H1FinitenessReport {
        quotient_h2: recorded_h2,
        h1_finitely_generated: fg,
        computed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibre::example_fixtures;
    use crate::words::Alphabet;
    use rand::{Rng, SeedableRng};

    fn untwisted_finite(rank: u32, q: FiniteGroup, images: Vec<usize>) -> FibreSpec {
        FibreSpec::untwisted_pair(
            Alphabet::new(rank),
            Quotient::Finite(q),
            FactorMap::Finite(images),
        )
        .unwrap()
    }

    #[test]
    fn bar_complex_is_a_complex() {
        for q in [
            FiniteGroup::trivial(),
            FiniteGroup::cyclic(4),
            FiniteGroup::symmetric3(),
        ] {
            let d2 = bar_d2(&q);
            let d3 = bar_d3(&q);
            let prod = d2.mul(&d3);
            for i in 0..prod.rows() {
                for j in 0..prod.cols() {
                    assert!(prod.get(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn h2_cyclic_vanishes() {
        assert!(h2_finite(&FiniteGroup::trivial()).unwrap().is_trivial());
        for n in 2..=6 {
            assert!(
                h2_finite(&FiniteGroup::cyclic(n)).unwrap().is_trivial(),
                "H2(Z/{n}) should vanish"
            );
        }
    }

    #[test]
    fn h2_elementary_abelian() {
        let z2 = FiniteGroup::cyclic(2);
        let v4 = FiniteGroup::product(&z2, &z2);
        let h = h2_finite(&v4).unwrap();
        assert_eq!(h.rank(), 0);
        assert_eq!(h.torsion(), &[BigInt::from(2)]);

        let z3 = FiniteGroup::cyclic(3);
        let e9 = FiniteGroup::product(&z3, &z3);
        let h = h2_finite(&e9).unwrap();
        assert_eq!(h.rank(), 0);
        assert_eq!(h.torsion(), &[BigInt::from(3)]);
    }

    #[test]
    fn h2_coprime_product_vanishes() {
        let q = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(3));
        assert!(h2_finite(&q).unwrap().is_trivial());
    }

    #[test]
    fn h2_order_bound() {
        let q = FiniteGroup::product(&FiniteGroup::cyclic(5), &FiniteGroup::cyclic(5));
        assert!(matches!(
            h2_finite(&q),
            Err(GroupError::OrderBound { order: 25, .. })
        ));
    }

    #[test]
    fn finite_abelianization_examples() {
        let (ab, _) = finite_abelianization(&FiniteGroup::cyclic(6));
        assert_eq!(ab.rank(), 0);
        assert_eq!(ab.torsion(), &[BigInt::from(6)]);
        // S3 abelianizes to Z/2
        let (ab, _) = finite_abelianization(&FiniteGroup::symmetric3());
        assert_eq!(ab.torsion(), &[BigInt::from(2)]);
    }

    #[test]
    fn predicted_h1_examples() {
        // trivial quotient: the whole product, H1 = Z^4
        let spec = untwisted_finite(2, FiniteGroup::trivial(), vec![0, 0]);
        let h = predicted_h1(&spec).unwrap();
        assert_eq!((h.rank(), h.torsion().len()), (4, 0));

        // Z/3 with both generators mapping to 1: Z^4, no torsion
        let spec = untwisted_finite(2, FiniteGroup::cyclic(3), vec![1, 1]);
        let h = predicted_h1(&spec).unwrap();
        assert_eq!((h.rank(), h.torsion().len()), (4, 0));

        // Z/2 x Z/2 with independent images: Z^4 + Z/2
        let v4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
        let spec = untwisted_finite(2, v4, vec![1, 2]);
        let h = predicted_h1(&spec).unwrap();
        assert_eq!(h.rank(), 4);
        assert_eq!(h.torsion(), &[BigInt::from(2)]);
    }

    #[test]
    fn oracle_matches_prediction_fixed() {
        for spec in [
            untwisted_finite(2, FiniteGroup::trivial(), vec![0, 0]),
            untwisted_finite(2, FiniteGroup::cyclic(2), vec![1, 1]),
            untwisted_finite(2, FiniteGroup::cyclic(3), vec![1, 1]),
            untwisted_finite(
                2,
                FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2)),
                vec![1, 2],
            ),
        ] {
            assert_eq!(h1_oracle(&spec).unwrap(), predicted_h1(&spec).unwrap());
        }
    }

    fn abelian_catalogue() -> Vec<FiniteGroup> {
        let c = FiniteGroup::cyclic;
        vec![
            c(2),
            c(3),
            c(4),
            FiniteGroup::product(&c(2), &c(2)),
            c(6),
            c(9),
            FiniteGroup::product(&c(3), &c(3)),
        ]
    }

    fn random_surjection(
        rng: &mut rand_chacha::ChaCha8Rng,
        q: &FiniteGroup,
        rank: usize,
    ) -> Vec<usize> {
        loop {
            let images: Vec<usize> = (0..rank).map(|_| rng.gen_range(0..q.order())).collect();
            if q.subgroup_closure(&images).len() == q.order() {
                return images;
            }
        }
    }

    #[test]
    fn oracle_matches_prediction_randomized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        let catalogue = abelian_catalogue();
        for _ in 0..20 {
            let q = &catalogue[rng.gen_range(0..catalogue.len())];
            let r1 = rng.gen_range(2..=3u32);
            let r2 = rng.gen_range(2..=3u32);
            let im0 = random_surjection(&mut rng, q, r1 as usize);
            let im1 = random_surjection(&mut rng, q, r2 as usize);
            let spec = FibreSpec::new(
                vec![Alphabet::new(r1), Alphabet::new(r2)],
                Quotient::Finite(q.clone()),
                vec![FactorMap::Finite(im0), FactorMap::Finite(im1)],
                Mode::Pullback,
                false,
            )
            .unwrap();
            assert_eq!(
                h1_oracle(&spec).unwrap(),
                predicted_h1(&spec).unwrap(),
                "disagreement over {}",
                q.name()
            );
        }
    }

    #[test]
    fn prediction_symmetric_in_factors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        let catalogue = abelian_catalogue();
        for _ in 0..10 {
            let q = &catalogue[rng.gen_range(0..catalogue.len())];
            let r1 = rng.gen_range(2..=3u32);
            let r2 = rng.gen_range(2..=3u32);
            let im0 = random_surjection(&mut rng, q, r1 as usize);
            let im1 = random_surjection(&mut rng, q, r2 as usize);
            let make = |ra, rb, ia: &Vec<usize>, ib: &Vec<usize>| {
                FibreSpec::new(
                    vec![Alphabet::new(ra), Alphabet::new(rb)],
                    Quotient::Finite(q.clone()),
                    vec![FactorMap::Finite(ia.clone()), FactorMap::Finite(ib.clone())],
                    Mode::Pullback,
                    false,
                )
                .unwrap()
            };
            let ab = predicted_h1(&make(r1, r2, &im0, &im1)).unwrap();
            let ba = predicted_h1(&make(r2, r1, &im1, &im0)).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn oracle_refuses_nonabelian() {
        let spec = untwisted_finite(2, FiniteGroup::symmetric3(), vec![1, 3]);
        assert!(h1_oracle(&spec).is_err());
        // the prediction itself is still available
        assert!(predicted_h1(&spec).is_ok());
    }

    #[test]
    fn finiteness_report() {
        let spec = untwisted_finite(2, FiniteGroup::cyclic(2), vec![1, 1]);
        let rep = h1_finiteness_report(&spec, None);
        assert!(rep.computed);
        assert_eq!(rep.h1_finitely_generated, Some(true));
        assert!(rep.quotient_h2.unwrap().is_trivial());

        // fixture with an infinite quotient and recorded H2 data: the
        // criterion is affirmative, H1 of that example being Z^3
        let fixtures = example_fixtures();
        let ex2 = &fixtures[1].spec;
        let rep = h1_finiteness_report(ex2, Some(AbelianGroup::free(1)));
        assert!(!rep.computed);
        assert_eq!(rep.h1_finitely_generated, Some(true));

        let rep = h1_finiteness_report(&fixtures[2].spec, None);
        assert_eq!(rep.h1_finitely_generated, None);
    }
}
