//! Fibre and subdirect products of free groups over evaluable quotients:
//! membership, generating data, the finite-presentability classifier,
//! three-factor kernels, the exponent-sum kernel family, and the worked
//! example fixtures.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::GroupError;
use crate::intlin::{hom_kernel, in_span, AbelianGroup, AbelianHom, IntMatrix};
use crate::nilpotent::{basic_commutators, nilpotent_equal};
use crate::presentations::{FinPresentation, FiniteGroup};
use crate::stallings::SubgroupGraph;
use crate::words::{Alphabet, Word};

/// Common quotient of the factors. Only evaluable forms admit a membership
/// test; the truncated form carries finitely many relators of an infinitely
/// presented group plus the finite-presentability flag, for classification
/// and fixture purposes only.
#[derive(Clone, Debug, PartialEq)]
pub enum Quotient {
    Finite(FiniteGroup),
    Abelian(AbelianGroup),
    FreeNilpotent { rank: u32, class: usize },
    Truncated {
        presentation: FinPresentation,
        finitely_presented: bool,
    },
}

impl Quotient {
    pub fn is_finitely_presented(&self) -> bool {
        match self {
            Quotient::Truncated {
                finitely_presented, ..
            } => *finitely_presented,
            _ => true,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            Quotient::Finite(q) => q.is_abelian(),
            Quotient::Abelian(_) => true,
            Quotient::FreeNilpotent { class, .. } => *class <= 1,
            Quotient::Truncated { .. } => false,
        }
    }

    /// Order when finite, None when infinite or not evaluable.
    pub fn order(&self) -> Option<usize> {
        match self {
            Quotient::Finite(q) => Some(q.order()),
            Quotient::Abelian(a) => a
                .order()
                .map(|o| usize::try_from(o).expect("desk-scale order")),
            Quotient::FreeNilpotent { .. } => None,
            Quotient::Truncated { .. } => None,
        }
    }
}

/// Letter images of one factor map, matching the quotient kind.
/// `Words` maps letters to words in the quotient's generators (free
/// nilpotent and truncated quotients).
#[derive(Clone, Debug, PartialEq)]
pub enum FactorMap {
    Finite(Vec<usize>),
    Abelian(Vec<Vec<i64>>),
    Words(Vec<Word>),
}

/// Membership semantics: `Pullback` is the two-factor fibre product
/// {(x, y) : p1(x) = p2(y)}; `KernelSum` is the kernel of the sum of the
/// maps into an abelian quotient (any number of factors).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Pullback,
    KernelSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FibreSpec {
    pub factors: Vec<Alphabet>,
    pub quotient: Quotient,
    pub maps: Vec<FactorMap>,
    pub mode: Mode,
    pub untwisted: bool,
}

/// Image of a word in an evaluable quotient.
#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    Finite(usize),
    Abelian(Vec<BigInt>),
    Nilpotent(Word),
}

fn abelian_matrix(images: &[Vec<i64>], dim: usize) -> IntMatrix {
    let mut m = IntMatrix::zeros(dim, images.len());
    for (j, v) in images.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m.set(i, j, BigInt::from(*x));
        }
    }
    m
}

/// Word a_1^{v_1} ... a_r^{v_r} realizing a lattice vector.
fn lattice_word(v: &[BigInt]) -> Word {
    let mut raw = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let e = i64::try_from(x.clone()).expect("desk-scale exponent");
        let letter = (i + 1) as i32;
        for _ in 0..e.unsigned_abs() {
            raw.push(if e > 0 { letter } else { -letter });
        }
    }
    Word::reduce(&raw)
}

/// Shortest word over the letter images reaching `target` in a finite group,
/// by breadth-first search from the identity. Deterministic.
fn bfs_preimage(q: &FiniteGroup, images: &[usize], target: usize) -> Option<Word> {
    let n = q.order();
    let mut prev: Vec<Option<(usize, i32)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        if c == target {
            let mut letters = Vec::new();
            let mut v = c;
            while let Some((p, l)) = prev[v] {
                letters.push(l);
                v = p;
            }
            letters.reverse();
            return Some(Word::reduce(&letters));
        }
        for (i, &g) in images.iter().enumerate() {
            let l = (i + 1) as i32;
            for (letter, t) in [(l, q.mul(c, g)), (-l, q.mul(c, q.inv(g)))] {
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((c, letter));
                    queue.push_back(t);
                }
            }
        }
    }
    None
}

impl FibreSpec {
    pub fn new(
        factors: Vec<Alphabet>,
        quotient: Quotient,
        maps: Vec<FactorMap>,
        mode: Mode,
        untwisted: bool,
    ) -> Result<Self, GroupError> {
        if factors.len() < 2 {
            return Err(GroupError::Invalid("need at least two factors".into()));
        }
        if maps.len() != factors.len() {
            return Err(GroupError::ArityMismatch {
                expected: factors.len(),
                got: maps.len(),
            });
        }
        if mode == Mode::Pullback && factors.len() != 2 {
            return Err(GroupError::Invalid(
                "pullback semantics requires exactly two factors".into(),
            ));
        }
        if mode == Mode::KernelSum && !matches!(quotient, Quotient::Abelian(_)) {
            return Err(GroupError::Invalid(
                "kernel-sum semantics requires an abelian quotient".into(),
            ));
        }
        let spec = FibreSpec {
            factors,
            quotient,
            maps,
            mode,
            untwisted,
        };
        for i in 0..spec.factors.len() {
            spec.check_map(i)?;
        }
        Ok(spec)
    }

    fn check_map(&self, i: usize) -> Result<(), GroupError> {
        let rank = self.factors[i].rank() as usize;
        match (&self.quotient, &self.maps[i]) {
            (Quotient::Finite(q), FactorMap::Finite(images)) => {
                if images.len() != rank {
                    return Err(GroupError::ArityMismatch {
                        expected: rank,
                        got: images.len(),
                    });
                }
                if images.iter().any(|&g| g >= q.order()) {
                    return Err(GroupError::Invalid("image index out of range".into()));
                }
                if q.subgroup_closure(images).len() != q.order() {
                    return Err(GroupError::NotSurjective(format!(
                        "factor {i} images do not generate the quotient"
                    )));
                }
            }
            (Quotient::Abelian(a), FactorMap::Abelian(images)) => {
                if images.len() != rank || images.iter().any(|v| v.len() != a.dim()) {
                    return Err(GroupError::ArityMismatch {
                        expected: rank,
                        got: images.len(),
                    });
                }
                let hom = AbelianHom::new(
                    AbelianGroup::free(rank),
                    a.clone(),
                    abelian_matrix(images, a.dim()),
                )?;
                if !hom.is_surjective() {
                    return Err(GroupError::NotSurjective(format!(
                        "factor {i} images do not span the quotient"
                    )));
                }
            }
            (Quotient::FreeNilpotent { rank: qr, .. }, FactorMap::Words(images)) => {
                if images.len() != rank {
                    return Err(GroupError::ArityMismatch {
                        expected: rank,
                        got: images.len(),
                    });
                }
                // surjectivity onto a nilpotent group follows from
                // surjectivity of the abelianization
                let rows: Vec<Vec<i64>> = images.iter().map(|w| w.exponent_sums(*qr)).collect();
                let m = IntMatrix::from_rows(&rows).transpose();
                let hom =
                    AbelianHom::new(AbelianGroup::free(rank), AbelianGroup::free(*qr as usize), m)?;
                if !hom.is_surjective() {
                    return Err(GroupError::NotSurjective(format!(
                        "factor {i} images are not surjective after abelianization"
                    )));
                }
            }
            (Quotient::Truncated { presentation, .. }, FactorMap::Words(images)) => {
                // not evaluable; only arity is checked
                if images.len() != rank {
                    return Err(GroupError::ArityMismatch {
                        expected: rank,
                        got: images.len(),
                    });
                }
                for w in images {
                    if w.max_letter() > presentation.alphabet.rank() {
                        return Err(GroupError::LetterOutOfRange {
                            letter: w.max_letter() as i32,
                            rank: presentation.alphabet.rank(),
                        });
                    }
                }
            }
            _ => {
                return Err(GroupError::Invalid(format!(
                    "factor {i} map kind does not match the quotient kind"
                )))
            }
        }
        Ok(())
    }

    /// Untwisted pullback of one map: both factors and maps identical.
    pub fn untwisted_pair(
        factor: Alphabet,
        quotient: Quotient,
        map: FactorMap,
    ) -> Result<Self, GroupError> {
        Self::new(
            vec![factor, factor],
            quotient,
            vec![map.clone(), map],
            Mode::Pullback,
            true,
        )
    }

    pub fn image(&self, factor: usize, w: &Word) -> Result<Image, GroupError> {
        if w.max_letter() > self.factors[factor].rank() {
            return Err(GroupError::LetterOutOfRange {
                letter: w.max_letter() as i32,
                rank: self.factors[factor].rank(),
            });
        }
        match (&self.quotient, &self.maps[factor]) {
            (Quotient::Finite(q), FactorMap::Finite(images)) => {
                Ok(Image::Finite(q.eval_word(images, w)))
            }
            (Quotient::Abelian(a), FactorMap::Abelian(images)) => {
                let m = abelian_matrix(images, a.dim());
                let sums: Vec<BigInt> = w
                    .exponent_sums(self.factors[factor].rank())
                    .into_iter()
                    .map(BigInt::from)
                    .collect();
                Ok(Image::Abelian(a.reduce(&m.mul_vec(&sums))))
            }
            (Quotient::FreeNilpotent { .. }, FactorMap::Words(images)) => {
                let mut out = Word::identity();
                for &x in w.letters() {
                    let im = &images[(x.unsigned_abs() - 1) as usize];
                    out = out.mul(&if x > 0 { im.clone() } else { im.inverse() });
                }
                Ok(Image::Nilpotent(out))
            }
            (Quotient::Truncated { .. }, _) => Err(GroupError::Invalid(
                "truncated quotient has no evaluable word problem".into(),
            )),
            _ => unreachable!("kind mismatch rejected at construction"),
        }
    }

    fn images_equal(&self, a: &Image, b: &Image) -> bool {
        match (&self.quotient, a, b) {
            (Quotient::Finite(_), Image::Finite(x), Image::Finite(y)) => x == y,
            (Quotient::Abelian(q), Image::Abelian(x), Image::Abelian(y)) => {
                q.reduce(x) == q.reduce(y)
            }
            (Quotient::FreeNilpotent { rank, class }, Image::Nilpotent(x), Image::Nilpotent(y)) => {
                nilpotent_equal(x, y, *rank, *class)
            }
            _ => unreachable!("image kinds match the quotient"),
        }
    }

    /// Membership of a word tuple, one word per factor.
    pub fn member(&self, tuple: &[Word]) -> Result<bool, GroupError> {
        if tuple.len() != self.factors.len() {
            return Err(GroupError::ArityMismatch {
                expected: self.factors.len(),
                got: tuple.len(),
            });
        }
        match self.mode {
            Mode::Pullback => {
                let a = self.image(0, &tuple[0])?;
                let b = self.image(1, &tuple[1])?;
                Ok(self.images_equal(&a, &b))
            }
            Mode::KernelSum => {
                let Quotient::Abelian(q) = &self.quotient else {
                    unreachable!("kernel-sum requires abelian quotient")
                };
                let mut acc = q.zero();
                for (i, w) in tuple.iter().enumerate() {
                    let Image::Abelian(v) = self.image(i, w)? else {
                        unreachable!()
                    };
                    acc = q.add(&acc, &v);
                }
                Ok(q.is_zero(&acc))
            }
        }
    }

    /// The abelianized map of a factor as a hom from the free lattice.
    pub fn abelian_hom(&self, factor: usize) -> Option<AbelianHom> {
        let (Quotient::Abelian(a), FactorMap::Abelian(images)) =
            (&self.quotient, &self.maps[factor])
        else {
            return None;
        };
        Some(
            AbelianHom::new(
                AbelianGroup::free(self.factors[factor].rank() as usize),
                a.clone(),
                abelian_matrix(images, a.dim()),
            )
            .expect("validated at construction"),
        )
    }

    /// Normal generators of ker(factor -> abelian quotient): words realizing
    /// a lattice basis of the abelianized kernel, plus letter commutators.
    /// A commutator [a_i, a_j] is dropped when e_i or e_j occurs in the
    /// lattice basis, since it then lies in the normal closure of that
    /// basis word.
    pub fn abelian_kernel_normal_generators(&self, factor: usize) -> Vec<Word> {
        let hom = self.abelian_hom(factor).expect("abelian quotient");
        let (_, basis) = hom_kernel(&hom).expect("free source");
        let rank = self.factors[factor].rank() as usize;
        let mut unit_in_basis = vec![false; rank];
        for v in &basis {
            let nonzero: Vec<usize> = (0..rank).filter(|&i| !v[i].is_zero()).collect();
            if nonzero.len() == 1 && num_traits::Signed::abs(&v[nonzero[0]]) == BigInt::from(1) {
                unit_in_basis[nonzero[0]] = true;
            }
        }
        let mut out: Vec<Word> = basis.iter().map(|v| lattice_word(v)).collect();
        for i in 0..rank {
            for j in i + 1..rank {
                if !unit_in_basis[i] && !unit_in_basis[j] {
                    out.push(Word::commutator(
                        &Word::generator((i + 1) as u32),
                        &Word::generator((j + 1) as u32),
                    ));
                }
            }
        }
        out
    }
}

/// Generating data for a two-factor fibre product: lift tuples covering the
/// quotient plus per-factor kernel words. `exact` means the output is a
/// certified generating set of G (finite quotients); otherwise the kernel
/// words generate the kernels only normally.
#[derive(Clone, Debug)]
pub struct GeneratorData {
    pub lifts: Vec<(Word, Word)>,
    pub kernel_parts: (Vec<Word>, Vec<Word>),
    pub exact: bool,
}

impl GeneratorData {
    /// All generators as word pairs, kernel words padded with the identity.
    pub fn tuples(&self) -> Vec<(Word, Word)> {
        let mut out = self.lifts.clone();
        for w in &self.kernel_parts.0 {
            out.push((w.clone(), Word::identity()));
        }
        for w in &self.kernel_parts.1 {
            out.push((Word::identity(), w.clone()));
        }
        out
    }
}

pub fn generators(spec: &FibreSpec) -> Result<GeneratorData, GroupError> {
    if spec.factors.len() != 2 || spec.mode != Mode::Pullback {
        return Err(GroupError::Invalid(
            "generating data is defined for two-factor pullbacks".into(),
        ));
    }
    match &spec.quotient {
        Quotient::Finite(q) => {
            let (FactorMap::Finite(im0), FactorMap::Finite(im1)) = (&spec.maps[0], &spec.maps[1])
            else {
                unreachable!()
            };
            let mut lifts = Vec::new();
            for (i, &g) in im0.iter().enumerate() {
                if g == q.identity() {
                    continue;
                }
                let partner = bfs_preimage(q, im1, g).expect("surjective map");
                lifts.push((Word::generator((i + 1) as u32), partner));
            }
            let k0 = SubgroupGraph::kernel_graph(spec.factors[0], q, im0)?;
            let k1 = SubgroupGraph::kernel_graph(spec.factors[1], q, im1)?;
            Ok(GeneratorData {
                lifts,
                kernel_parts: (k0.free_basis(), k1.free_basis()),
                exact: true,
            })
        }
        Quotient::Abelian(a) => {
            let mut lifts = Vec::new();
            if spec.untwisted && spec.factors[0].rank() == spec.factors[1].rank() {
                for i in 1..=spec.factors[0].rank() {
                    lifts.push((Word::generator(i), Word::generator(i)));
                }
            } else {
                let (FactorMap::Abelian(im0), FactorMap::Abelian(im1)) =
                    (&spec.maps[0], &spec.maps[1])
                else {
                    unreachable!()
                };
                let cols0: Vec<Vec<BigInt>> = im0
                    .iter()
                    .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                let cols1: Vec<Vec<BigInt>> = im1
                    .iter()
                    .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                for g in 0..a.dim() {
                    let target = a.generator(g);
                    let z0 = in_span(&target, &cols0, a).ok_or_else(|| {
                        GroupError::NotSurjective("factor 0 misses a quotient generator".into())
                    })?;
                    let z1 = in_span(&target, &cols1, a).ok_or_else(|| {
                        GroupError::NotSurjective("factor 1 misses a quotient generator".into())
                    })?;
                    lifts.push((lattice_word(&z0), lattice_word(&z1)));
                }
            }
            Ok(GeneratorData {
                lifts,
                kernel_parts: (
                    spec.abelian_kernel_normal_generators(0),
                    spec.abelian_kernel_normal_generators(1),
                ),
                exact: false,
            })
        }
        Quotient::FreeNilpotent { class, .. } => {
            if !spec.untwisted {
                return Err(GroupError::Invalid(
                    "nilpotent-quotient generating data requires the untwisted form".into(),
                ));
            }
            let mut lifts = Vec::new();
            for i in 1..=spec.factors[0].rank() {
                lifts.push((Word::generator(i), Word::generator(i)));
            }
            // kernel of free -> free nilpotent of class c is the lower
            // central term gamma_{c+1}, normally generated by left-normed
            // commutators of weight c+1 in the letters
            let base: Vec<Word> = spec.factors[0].letters().map(|l| Word::reduce(&[l])).collect();
            let kernel = basic_commutators(&base, class + 1, 64);
            Ok(GeneratorData {
                lifts,
                kernel_parts: (kernel.clone(), kernel),
                exact: false,
            })
        }
        Quotient::Truncated { presentation, .. } => {
            if !spec.untwisted {
                return Err(GroupError::Invalid(
                    "truncated-quotient generating data requires the untwisted form".into(),
                ));
            }
            let mut lifts = Vec::new();
            for i in 1..=spec.factors[0].rank() {
                lifts.push((Word::generator(i), Word::generator(i)));
            }
            // relator words of the quotient, read in the first factor's
            // letters; the mirrored second-factor copies are redundant
            Ok(GeneratorData {
                lifts,
                kernel_parts: (presentation.relators.clone(), Vec::new()),
                exact: false,
            })
        }
    }
}

/// Verifies, for a finite quotient, that the generating data generates the
/// whole fibre product: the kernel parts are certified free bases of
/// L_1 x L_2, so it is enough that the images of all generators in Q x Q
/// generate exactly the graph subgroup {(q, q)}.
pub fn finite_generation_certificate(
    spec: &FibreSpec,
    data: &GeneratorData,
) -> Result<bool, GroupError> {
    let Quotient::Finite(q) = &spec.quotient else {
        return Err(GroupError::Invalid("finite quotient required".into()));
    };
    if !data.exact {
        return Ok(false);
    }
    let (FactorMap::Finite(im0), FactorMap::Finite(im1)) = (&spec.maps[0], &spec.maps[1]) else {
        unreachable!()
    };
    let prod = FiniteGroup::product(q, q);
    let n = q.order();
    let idx = |x: usize, y: usize| x * n + y;
    let gen_images: Vec<usize> = data
        .tuples()
        .iter()
        .map(|(u, v)| idx(q.eval_word(im0, u), q.eval_word(im1, v)))
        .collect();
    let mut closure = prod.subgroup_closure(&gen_images);
    closure.sort_unstable();
    let mut diagonal: Vec<usize> = (0..n).map(|g| idx(g, g)).collect();
    diagonal.sort_unstable();
    Ok(closure == diagonal)
}

/// Index of the fibre product in the full direct product, finite quotients
/// only: |Q x Q| / |diagonal| = |Q|.
pub fn index_in_product(spec: &FibreSpec) -> Option<usize> {
    spec.quotient.order()
}

/// Finite-presentability classification of a two-factor fibre product of
/// free groups, following the decision tree: an injective factor map gives
/// a free group; a finite quotient gives finite presentability at index |Q|;
/// an infinite finitely presented quotient gives finite generation without
/// finite presentability; a quotient that is not finitely presented rules
/// out finite generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Free,
    FinitelyPresented { index: usize },
    FgNotFp,
    NotFg,
    Unknown,
}

/// Whether ker(factor map) is trivial, when decidable.
fn factor_kernel_trivial(spec: &FibreSpec, factor: usize) -> Option<bool> {
    let rank = spec.factors[factor].rank();
    match &spec.quotient {
        // a free group of rank >= 1 never embeds in a finite group
        Quotient::Finite(_) => Some(false),
        Quotient::Abelian(_) => {
            if rank >= 2 {
                // letter commutators die
                return Some(false);
            }
            let hom = spec.abelian_hom(factor).expect("abelian quotient");
            let (k, _) = hom_kernel(&hom).expect("free source");
            Some(k.rank() == 0)
        }
        Quotient::FreeNilpotent { rank: qr, class } => {
            if rank >= 2 {
                // nilpotent groups contain no rank-2 free subgroups
                return Some(false);
            }
            let FactorMap::Words(images) = &spec.maps[factor] else {
                unreachable!()
            };
            // Z embeds iff the image is nontrivial (free nilpotent groups
            // are torsion-free)
            Some(!nilpotent_equal(&images[0], &Word::identity(), *qr, *class))
        }
        Quotient::Truncated {
            finitely_presented, ..
        } => {
            if *finitely_presented {
                None
            } else {
                // the quotient is not free (free groups are finitely
                // presented), so a surjection from a free group has kernel
                Some(false)
            }
        }
    }
}

pub fn classify_two_factor(spec: &FibreSpec) -> Result<Classification, GroupError> {
    if spec.factors.len() != 2 || spec.mode != Mode::Pullback {
        return Err(GroupError::Invalid(
            "classification is defined for two-factor pullbacks".into(),
        ));
    }
    let t0 = factor_kernel_trivial(spec, 0);
    let t1 = factor_kernel_trivial(spec, 1);
    if t0 == Some(true) || t1 == Some(true) {
        return Ok(Classification::Free);
    }
    if t0.is_none() || t1.is_none() {
        return Ok(Classification::Unknown);
    }
    if let Some(order) = spec.quotient.order() {
        return Ok(Classification::FinitelyPresented { index: order });
    }
    if spec.quotient.is_finitely_presented() {
        Ok(Classification::FgNotFp)
    } else {
        Ok(Classification::NotFg)
    }
}

/// True iff the fibre product is normal in the full direct product, which
/// holds exactly when the quotient is abelian.
pub fn normality_test(spec: &FibreSpec) -> bool {
    spec.quotient.is_abelian()
}

/// Candidate generators and verification data for the kernel of the sum of
/// three surjections onto an abelian group.
#[derive(Clone, Debug)]
pub struct ThreeFactorReport {
    pub candidates: Vec<Vec<Word>>,
    pub pairwise_surjective: bool,
    pub factor_restriction_ok: bool,
    pub candidates_span_abelianized_kernel: bool,
}

pub fn three_factor_kernel(spec: &FibreSpec) -> Result<ThreeFactorReport, GroupError> {
    let Quotient::Abelian(q) = &spec.quotient else {
        return Err(GroupError::Invalid("abelian quotient required".into()));
    };
    if spec.factors.len() != 3 || spec.mode != Mode::KernelSum {
        return Err(GroupError::Invalid(
            "three kernel-sum factors required".into(),
        ));
    }
    let n = spec.factors.len();
    let cols: Vec<Vec<Vec<BigInt>>> = (0..n)
        .map(|i| {
            let FactorMap::Abelian(im) = &spec.maps[i] else {
                unreachable!()
            };
            im.iter()
                .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
                .collect()
        })
        .collect();

    let mut candidates: Vec<Vec<Word>> = Vec::new();
    let pad = |i: usize, w: Word| -> Vec<Word> {
        let mut t = vec![Word::identity(); n];
        t[i] = w;
        t
    };
    // within-factor kernel words
    for i in 0..n {
        for w in spec.abelian_kernel_normal_generators(i) {
            candidates.push(pad(i, w));
        }
    }
    // cross-factor difference lifts per canonical quotient generator
    for i in 0..n {
        for j in i + 1..n {
            for g in 0..q.dim() {
                let target = q.generator(g);
                let zi = in_span(&target, &cols[i], q).ok_or_else(|| {
                    GroupError::NotSurjective(format!("factor {i} misses a generator"))
                })?;
                let zj = in_span(&q.neg(&target), &cols[j], q).ok_or_else(|| {
                    GroupError::NotSurjective(format!("factor {j} misses a generator"))
                })?;
                let mut t = vec![Word::identity(); n];
                t[i] = lattice_word(&zi);
                t[j] = lattice_word(&zj);
                candidates.push(t);
            }
        }
    }
    for c in &candidates {
        debug_assert_eq!(spec.member(c), Ok(true));
    }

    // projection of the kernel onto factors (i, j) is onto iff the third
    // map is onto, which construction validated; recheck explicitly
    let pairwise_surjective = (0..n).all(|k| {
        spec.abelian_hom(k)
            .map(|h| h.is_surjective())
            .unwrap_or(false)
    });

    // G cap (factor i) = ker(map i): sampled via single-slot tuples
    let mut factor_restriction_ok = true;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
    for _ in 0..200 {
        let i = rng.gen_range(0..n);
        let rank = spec.factors[i].rank() as i32;
        let len = rng.gen_range(0..8);
        let raw: Vec<i32> = (0..len)
            .map(|_| {
                let l = rng.gen_range(1..=rank);
                if rng.gen_bool(0.5) {
                    l
                } else {
                    -l
                }
            })
            .collect();
        let w = Word::reduce(&raw);
        let in_g = spec.member(&pad(i, w.clone()))?;
        let Image::Abelian(img) = spec.image(i, &w)? else {
            unreachable!()
        };
        if in_g != q.is_zero(&img) {
            factor_restriction_ok = false;
        }
    }

    // abelianized span: candidate exponent vectors must span the kernel
    // lattice of the stacked map Z^(r1+..+rn) -> Q
    let total: usize = spec.factors.iter().map(|a| a.rank() as usize).sum();
    let mut stacked = IntMatrix::zeros(q.dim(), total);
    let mut off = 0usize;
    for i in 0..n {
        for (j, col) in cols[i].iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                stacked.set(r, off + j, x.clone());
            }
        }
        off += spec.factors[i].rank() as usize;
    }
    let stacked_hom = AbelianHom::new(AbelianGroup::free(total), q.clone(), stacked)
        .expect("validated images");
    let (_, kernel_basis) = hom_kernel(&stacked_hom).expect("free source");
    let candidate_vectors: Vec<Vec<BigInt>> = candidates
        .iter()
        .map(|t| {
            let mut v = Vec::with_capacity(total);
            for (i, w) in t.iter().enumerate() {
                v.extend(
                    w.exponent_sums(spec.factors[i].rank())
                        .into_iter()
                        .map(BigInt::from),
                );
            }
            v
        })
        .collect();
    let ambient = AbelianGroup::free(total);
    let candidates_span_abelianized_kernel = kernel_basis
        .iter()
        .all(|b| in_span(b, &candidate_vectors, &ambient).is_some());

    Ok(ThreeFactorReport {
        candidates,
        pairwise_surjective,
        factor_restriction_ok,
        candidates_span_abelianized_kernel,
    })
}

/// The kernel of the total exponent-sum map from a product of n rank-2 free
/// groups onto Z, with the standard generator list.
pub fn sb_family(n: usize) -> Result<(FibreSpec, Vec<Vec<Word>>), GroupError> {
    if n < 2 {
        return Err(GroupError::Invalid("need at least two factors".into()));
    }
    let spec = FibreSpec::new(
        vec![Alphabet::new(2); n],
        Quotient::Abelian(AbelianGroup::free(1)),
        vec![FactorMap::Abelian(vec![vec![1], vec![1]]); n],
        Mode::KernelSum,
        true,
    )?;
    let mut gens: Vec<Vec<Word>> = Vec::new();
    let pad = |i: usize, w: Word| -> Vec<Word> {
        let mut t = vec![Word::identity(); n];
        t[i] = w;
        t
    };
    // a_i b_i^-1 within each factor
    for i in 0..n {
        gens.push(pad(i, Word::reduce(&[1, -2])));
    }
    // a_i a_j^-1 and b_i b_j^-1 across factors
    for i in 0..n {
        for j in i + 1..n {
            for letter in [1i32, 2] {
                let mut t = vec![Word::identity(); n];
                t[i] = Word::reduce(&[letter]);
                t[j] = Word::reduce(&[-letter]);
                gens.push(t);
            }
        }
    }
    Ok((spec, gens))
}

/// Checks the restriction identity: membership in the n-factor kernel with
/// identity last coordinate matches membership of the truncation in the
/// (n-1)-factor kernel, on random samples.
pub fn sb_restriction_check(n: usize, samples: usize, seed: u64) -> Result<bool, GroupError> {
    if n < 3 {
        return Err(GroupError::Invalid("need at least three factors".into()));
    }
    let (big, _) = sb_family(n)?;
    let (small, _) = sb_family(n - 1)?;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut tuple: Vec<Word> = Vec::new();
        for _ in 0..n - 1 {
            let len = rng.gen_range(0..8);
            let raw: Vec<i32> = (0..len)
                .map(|_| {
                    let l = rng.gen_range(1..=2);
                    if rng.gen_bool(0.5) {
                        l
                    } else {
                        -l
                    }
                })
                .collect();
            tuple.push(Word::reduce(&raw));
        }
        tuple.push(Word::identity());
        let in_big = big.member(&tuple)?;
        let in_small = small.member(&tuple[..n - 1])?;
        if in_big != in_small {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A worked fixture: a fibre-product description plus the data it was
/// published with, including qualitative conclusions that are recorded,
/// not recomputed.
#[derive(Clone, Debug)]
pub struct ExampleFixture {
    pub name: &'static str,
    pub spec: FibreSpec,
    /// Truncated relator lists of non-free factors, empty when free.
    pub factor_relators: Vec<Vec<Word>>,
    /// The printed generating tuples.
    pub printed_generators: Vec<(Word, Word)>,
    /// Recorded conclusion: is the fibre product finitely generated?
    pub finitely_generated: bool,
    /// Recorded conclusion: is it finitely presented?
    pub finitely_presented: bool,
}

/// Relators of a fixed two-generator group that is finitely generated but
/// not finitely presented (wreath-type commutator relations), truncated to
/// the first few.
fn truncated_nonfp_quotient() -> FinPresentation {
    let c1 = Word::generator(1);
    let mut relators = Vec::new();
    for k in 1..=3i64 {
        let c2k = Word::generator(2).pow(k);
        let conj = c1.conjugate_by(&c2k.inverse());
        relators.push(Word::commutator(&c1, &conj));
    }
    FinPresentation::new(Alphabet::new(2), relators)
}

pub fn example_fixtures() -> Vec<ExampleFixture> {
    let w = |raw: &[i32]| Word::reduce(raw);
    let f2 = Alphabet::new(2);
    let f3 = Alphabet::new(3);
    let mut out = Vec::new();

    // two rank-2 free factors onto Z, second letter dying
    let ex1 = FibreSpec::untwisted_pair(
        f2,
        Quotient::Abelian(AbelianGroup::free(1)),
        FactorMap::Abelian(vec![vec![1], vec![0]]),
    )
    .unwrap();
    out.push(ExampleFixture {
        name: "rank2-over-Z",
        spec: ex1,
        factor_relators: vec![vec![], vec![]],
        printed_generators: vec![
            (w(&[1]), w(&[1])),
            (w(&[2]), w(&[2])),
            (w(&[2]), Word::identity()),
            (Word::identity(), w(&[2])),
        ],
        finitely_generated: true,
        finitely_presented: false,
    });

    // free rank 2 against free nilpotent class 2 rank 2, over Z^2;
    // the second factor is modeled by its free preimage, the class-2
    // structure living in the quotient descriptor
    let ex2 = FibreSpec::untwisted_pair(
        f2,
        Quotient::Abelian(AbelianGroup::free(2)),
        FactorMap::Abelian(vec![vec![1, 0], vec![0, 1]]),
    )
    .unwrap();
    out.push(ExampleFixture {
        name: "free-by-nilpotent-over-Z2",
        spec: ex2,
        factor_relators: vec![
            vec![],
            // class-2 relators of the second factor
            vec![
                Word::commutator(&Word::commutator(&w(&[1]), &w(&[2])), &w(&[1])),
                Word::commutator(&Word::commutator(&w(&[1]), &w(&[2])), &w(&[2])),
            ],
        ],
        printed_generators: vec![
            (w(&[1]), w(&[1])),
            (w(&[2]), w(&[2])),
            (Word::commutator(&w(&[1]), &w(&[2])), Word::identity()),
            (Word::identity(), Word::commutator(&w(&[1]), &w(&[2]))),
        ],
        finitely_generated: true,
        finitely_presented: true,
    });

    // both factors free rank 2 onto a quotient that is not finitely
    // presented: the pullback is not even finitely generated
    let q3 = truncated_nonfp_quotient();
    let ex3 = FibreSpec::untwisted_pair(
        f2,
        Quotient::Truncated {
            presentation: q3.clone(),
            finitely_presented: false,
        },
        FactorMap::Words(vec![w(&[1]), w(&[2])]),
    )
    .unwrap();
    out.push(ExampleFixture {
        name: "free-over-nonfp-quotient",
        spec: ex3,
        factor_relators: vec![vec![], vec![]],
        printed_generators: {
            let mut g = vec![(w(&[1]), w(&[1])), (w(&[2]), w(&[2]))];
            for r in &q3.relators {
                g.push((r.clone(), Word::identity()));
            }
            g
        },
        finitely_generated: false,
        finitely_presented: false,
    });

    // rank-3 factors presented over the same non-f.p. quotient with a free
    // extra letter; the pullback is finitely generated but not finitely
    // presented
    let ex4 = FibreSpec::untwisted_pair(
        f3,
        Quotient::Truncated {
            presentation: q3.clone(),
            finitely_presented: false,
        },
        FactorMap::Words(vec![w(&[1]), w(&[2]), Word::identity()]),
    )
    .unwrap();
    out.push(ExampleFixture {
        name: "presented-factors-extra-letter",
        spec: ex4,
        factor_relators: vec![q3.relators.clone(), q3.relators.clone()],
        printed_generators: vec![
            (w(&[1]), w(&[1])),
            (w(&[2]), w(&[2])),
            (w(&[3]), w(&[3])),
            (w(&[3]), Word::identity()),
            (Word::identity(), w(&[3])),
        ],
        finitely_generated: true,
        finitely_presented: false,
    });

    // mixed: a presented rank-3 factor against a free rank-2 factor
    let ex5 = FibreSpec::new(
        vec![f3, f2],
        Quotient::Truncated {
            presentation: q3.clone(),
            finitely_presented: false,
        },
        vec![
            FactorMap::Words(vec![w(&[1]), w(&[2]), Word::identity()]),
            FactorMap::Words(vec![w(&[1]), w(&[2])]),
        ],
        Mode::Pullback,
        false,
    )
    .unwrap();
    out.push(ExampleFixture {
        name: "presented-against-free",
        spec: ex5,
        factor_relators: vec![q3.relators.clone(), vec![]],
        printed_generators: vec![
            (w(&[1]), w(&[1])),
            (w(&[2]), w(&[2])),
            (w(&[3]), Word::identity()),
        ],
        finitely_generated: true,
        finitely_presented: false,
    });

    out
}

// serde representation

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum QuotientRepr {
    Finite {
        name: String,
        table: Vec<Vec<usize>>,
    },
    Abelian(AbelianGroup),
    Nilpotent {
        rank: u32,
        class: usize,
    },
    Truncated {
        rank: u32,
        relators: Vec<Vec<i32>>,
        finitely_presented: bool,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MapRepr {
    Finite(Vec<usize>),
    Abelian(Vec<Vec<i64>>),
    Words(Vec<Vec<i32>>),
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    factors: Vec<u32>,
    quotient: QuotientRepr,
    maps: Vec<MapRepr>,
    mode: String,
    untwisted: bool,
}

impl Serialize for FibreSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let quotient = match &self.quotient {
            Quotient::Finite(q) => QuotientRepr::Finite {
                name: q.name().to_string(),
                table: q.table_rows(),
            },
            Quotient::Abelian(a) => QuotientRepr::Abelian(a.clone()),
            Quotient::FreeNilpotent { rank, class } => QuotientRepr::Nilpotent {
                rank: *rank,
                class: *class,
            },
            Quotient::Truncated {
                presentation,
                finitely_presented,
            } => QuotientRepr::Truncated {
                rank: presentation.alphabet.rank(),
                relators: presentation
                    .relators
                    .iter()
                    .map(|r| r.letters().to_vec())
                    .collect(),
                finitely_presented: *finitely_presented,
            },
        };
        let maps = self
            .maps
            .iter()
            .map(|m| match m {
                FactorMap::Finite(v) => MapRepr::Finite(v.clone()),
                FactorMap::Abelian(v) => MapRepr::Abelian(v.clone()),
                FactorMap::Words(v) => {
                    MapRepr::Words(v.iter().map(|w| w.letters().to_vec()).collect())
                }
            })
            .collect();
        SpecRepr {
            factors: self.factors.iter().map(|a| a.rank()).collect(),
            quotient,
            maps,
            mode: match self.mode {
                Mode::Pullback => "pullback".into(),
                Mode::KernelSum => "kernel_sum".into(),
            },
            untwisted: self.untwisted,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FibreSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SpecRepr::deserialize(d)?;
        let quotient = match repr.quotient {
            QuotientRepr::Finite { name, table } => Quotient::Finite(
                FiniteGroup::from_table(table, name)
                    .map_err(|e| D::Error::custom(e.to_string()))?,
            ),
            QuotientRepr::Abelian(a) => Quotient::Abelian(a),
            QuotientRepr::Nilpotent { rank, class } => Quotient::FreeNilpotent { rank, class },
            QuotientRepr::Truncated {
                rank,
                relators,
                finitely_presented,
            } => Quotient::Truncated {
                presentation: FinPresentation::new(
                    Alphabet::new(rank),
                    relators.iter().map(|r| Word::reduce(r)).collect(),
                ),
                finitely_presented,
            },
        };
        let maps = repr
            .maps
            .into_iter()
            .map(|m| match m {
                MapRepr::Finite(v) => FactorMap::Finite(v),
                MapRepr::Abelian(v) => FactorMap::Abelian(v),
                MapRepr::Words(v) => {
                    FactorMap::Words(v.iter().map(|w| Word::reduce(w)).collect())
                }
            })
            .collect();
        let mode = match repr.mode.as_str() {
            "pullback" => Mode::Pullback,
            "kernel_sum" => Mode::KernelSum,
            other => return Err(D::Error::custom(format!("unknown mode {other:?}"))),
        };
        FibreSpec::new(
            repr.factors.into_iter().map(Alphabet::new).collect(),
            quotient,
            maps,
            mode,
            repr.untwisted,
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}
