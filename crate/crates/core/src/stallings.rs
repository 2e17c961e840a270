//! Folded subgroup graphs for finitely generated subgroups of free groups:
//! folding, membership, index, coset tables, free bases, normality.

use crate::error::GroupError;
use crate::presentations::{CosetTable, FiniteGroup};
use crate::words::{Alphabet, Word};

/// Folded core graph of a finitely generated subgroup. Vertex 0 is the
/// basepoint; edges are stored for positive letters only, with the inverse
/// direction mirrored in `inn`. Deterministic and co-deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupGraph {
    alphabet: Alphabet,
    out: Vec<Vec<Option<usize>>>,
    inn: Vec<Vec<Option<usize>>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    /// Merge, keeping the smaller id as root so the basepoint survives.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

impl SubgroupGraph {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().flatten().filter(|e| e.is_some()).count()
    }

    /// Fold the wedge of generator loops into the core subgroup graph.
    pub fn fold_from_generators(
        alphabet: Alphabet,
        gens: &[Word],
    ) -> Result<SubgroupGraph, GroupError> {
        for g in gens {
            if g.max_letter() > alphabet.rank() {
                return Err(GroupError::LetterOutOfRange {
                    letter: g.max_letter() as i32,
                    rank: alphabet.rank(),
                });
            }
        }
        // wedge of loops at the basepoint, one per nontrivial generator
        let mut edges: Vec<(usize, u32, usize)> = Vec::new();
        let mut nv = 1usize;
        for g in gens {
            let ls = g.letters();
            if ls.is_empty() {
                continue;
            }
            let mut cur = 0usize;
            for (i, &x) in ls.iter().enumerate() {
                let next = if i + 1 == ls.len() {
                    0
                } else {
                    nv += 1;
                    nv - 1
                };
                if x > 0 {
                    edges.push((cur, x as u32, next));
                } else {
                    edges.push((next, (-x) as u32, cur));
                }
                cur = next;
            }
        }
        // fold: identify targets of equal-labeled edges at a common vertex
        let mut uf = UnionFind::new(nv);
        loop {
            use std::collections::HashMap;
            let mut changed = false;
            let mut by_out: HashMap<(usize, u32), usize> = HashMap::new();
            let mut by_in: HashMap<(usize, u32), usize> = HashMap::new();
            for &(u, l, v) in &edges {
                let (ru, rv) = (uf.find(u), uf.find(v));
                if let Some(&w) = by_out.get(&(ru, l)) {
                    if uf.union(rv, w) {
                        changed = true;
                    }
                } else {
                    by_out.insert((ru, l), rv);
                }
                if let Some(&w) = by_in.get(&(rv, l)) {
                    if uf.union(ru, w) {
                        changed = true;
                    }
                } else {
                    by_in.insert((rv, l), ru);
                }
            }
            if !changed {
                break;
            }
        }
        // compact vertex ids, basepoint root first
        let mut id: Vec<Option<usize>> = vec![None; nv];
        let mut next = 0usize;
        let base = uf.find(0);
        id[base] = Some(0);
        next += 1;
        for v in 0..nv {
            let r = uf.find(v);
            if id[r].is_none() {
                id[r] = Some(next);
                next += 1;
            }
        }
        let rank = alphabet.rank() as usize;
        let mut out = vec![vec![None; rank]; next];
        let mut inn = vec![vec![None; rank]; next];
        for &(u, l, v) in &edges {
            let (cu, cv) = (id[uf.find(u)].unwrap(), id[uf.find(v)].unwrap());
            out[cu][(l - 1) as usize] = Some(cv);
            inn[cv][(l - 1) as usize] = Some(cu);
        }
        let mut g = SubgroupGraph { alphabet, out, inn };
        g.trim_to_core();
        Ok(g.canonical())
    }

    /// Drop non-basepoint vertices of total degree at most one.
    fn trim_to_core(&mut self) {
        loop {
            let mut victim = None;
            for v in 1..self.out.len() {
                let deg = self.out[v].iter().filter(|e| e.is_some()).count()
                    + self.inn[v].iter().filter(|e| e.is_some()).count();
                if deg <= 1 {
                    victim = Some(v);
                    break;
                }
            }
            let Some(v) = victim else { return };
            for row in self.out.iter_mut().chain(self.inn.iter_mut()) {
                for e in row.iter_mut() {
                    if *e == Some(v) {
                        *e = None;
                    }
                }
            }
            // remove v and shift ids above it down by one
            self.out.remove(v);
            self.inn.remove(v);
            for row in self.out.iter_mut().chain(self.inn.iter_mut()) {
                for e in row.iter_mut() {
                    if let Some(t) = e {
                        if *t > v {
                            *t -= 1;
                        }
                    }
                }
            }
        }
    }

    /// Canonical relabeling by breadth-first search from the basepoint,
    /// letters visited in a fixed order. Isomorphic based graphs become equal.
    fn canonical(&self) -> SubgroupGraph {
        let n = self.out.len();
        let rank = self.alphabet.rank() as usize;
        let mut order: Vec<Option<usize>> = vec![None; n];
        order[0] = Some(0);
        let mut next = 1usize;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for l in 0..rank {
                for t in [self.out[v][l], self.inn[v][l]].into_iter().flatten() {
                    if order[t].is_none() {
                        order[t] = Some(next);
                        next += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        assert_eq!(next, n, "subgroup graph must be connected");
        let mut out = vec![vec![None; rank]; n];
        let mut inn = vec![vec![None; rank]; n];
        for v in 0..n {
            let cv = order[v].unwrap();
            for l in 0..rank {
                if let Some(t) = self.out[v][l] {
                    out[cv][l] = Some(order[t].unwrap());
                    inn[order[t].unwrap()][l] = Some(cv);
                }
            }
        }
        SubgroupGraph {
            alphabet: self.alphabet,
            out,
            inn,
        }
    }

    /// Follow a reduced word from a vertex, if every step is defined.
    /// Positive-letter edge list (source, letter, target).
    pub fn edges(&self) -> Vec<(usize, u32, usize)> {
        let mut out = Vec::new();
        for (v, row) in self.out.iter().enumerate() {
            for (l, tgt) in row.iter().enumerate() {
                if let Some(w) = tgt {
                    out.push((v, (l + 1) as u32, *w));
                }
            }
        }
        out
    }

    pub fn trace(&self, start: usize, w: &Word) -> Option<usize> {
        let mut v = start;
        for &x in w.letters() {
            v = if x > 0 {
                self.out[v][(x - 1) as usize]?
            } else {
                self.inn[v][(-x - 1) as usize]?
            };
        }
        Some(v)
    }

    /// True iff the word traces a basepoint loop.
    pub fn member(&self, w: &Word) -> Result<bool, GroupError> {
        if w.max_letter() > self.alphabet.rank() {
            return Err(GroupError::AlphabetMismatch {
                expected: self.alphabet.rank(),
                got: w.max_letter(),
            });
        }
        Ok(self.trace(0, w) == Some(0))
    }

    /// Finite index iff the graph is complete; then vertices are the right
    /// cosets with vertex 0 the subgroup itself.
    pub fn index_and_cosets(&self) -> Option<CosetTable> {
        let rank = self.alphabet.rank() as usize;
        let mut table = Vec::with_capacity(self.out.len());
        for row in &self.out {
            let mut r = Vec::with_capacity(rank);
            for l in 0..rank {
                r.push(row[l]?);
            }
            table.push(r);
        }
        Some(CosetTable::new(self.alphabet.rank(), table).expect("folded complete graph"))
    }

    /// Free basis from the complement of a breadth-first spanning tree.
    pub fn free_basis(&self) -> Vec<Word> {
        let n = self.out.len();
        let rank = self.alphabet.rank() as usize;
        // tree paths from the basepoint, as words
        let mut path: Vec<Option<Word>> = vec![None; n];
        path[0] = Some(Word::identity());
        let mut tree: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for l in 0..rank {
                if let Some(t) = self.out[v][l] {
                    if path[t].is_none() {
                        path[t] = Some(
                            path[v]
                                .as_ref()
                                .unwrap()
                                .mul(&Word::reduce(&[(l + 1) as i32])),
                        );
                        tree.insert((v, l));
                        queue.push_back(t);
                    }
                }
                if let Some(s) = self.inn[v][l] {
                    if path[s].is_none() {
                        path[s] = Some(
                            path[v]
                                .as_ref()
                                .unwrap()
                                .mul(&Word::reduce(&[-((l + 1) as i32)])),
                        );
                        tree.insert((s, l));
                        queue.push_back(s);
                    }
                }
            }
        }
        let mut basis = Vec::new();
        for v in 0..n {
            for l in 0..rank {
                if let Some(t) = self.out[v][l] {
                    if !tree.contains(&(v, l)) {
                        let w = path[v]
                            .as_ref()
                            .unwrap()
                            .mul(&Word::reduce(&[(l + 1) as i32]))
                            .mul(&path[t].as_ref().unwrap().inverse());
                        basis.push(w);
                    }
                }
            }
        }
        basis
    }

    /// Normality test. Finitely generated normal subgroups of a free group
    /// are trivial or of finite index, so infinite-index nontrivial
    /// subgroups are rejected without search.
    pub fn is_normal(&self) -> bool {
        let basis = self.free_basis();
        if basis.is_empty() {
            return true;
        }
        if self.index_and_cosets().is_none() {
            return false;
        }
        for w in &basis {
            for l in self.alphabet.letters() {
                for s in [l, -l] {
                    let conj = w.conjugate_by(&Word::reduce(&[s]));
                    if !self.member(&conj).unwrap() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Coset automaton of the kernel of the map sending letter i to
    /// `images[i-1]` in a finite group: vertices are group elements,
    /// basepoint the identity, edges q -> q * image.
    pub fn kernel_graph(
        alphabet: Alphabet,
        q: &FiniteGroup,
        images: &[usize],
    ) -> Result<SubgroupGraph, GroupError> {
        if images.len() != alphabet.rank() as usize {
            return Err(GroupError::ArityMismatch {
                expected: alphabet.rank() as usize,
                got: images.len(),
            });
        }
        if q.subgroup_closure(images).len() != q.order() {
            return Err(GroupError::NotSurjective(format!(
                "letter images generate a proper subgroup of {}",
                q.name()
            )));
        }
        let n = q.order();
        let rank = alphabet.rank() as usize;
        let mut out = vec![vec![None; rank]; n];
        let mut inn = vec![vec![None; rank]; n];
        for v in 0..n {
            for l in 0..rank {
                let t = q.mul(v, images[l]);
                out[v][l] = Some(t);
                inn[t][l] = Some(v);
            }
        }
        Ok(SubgroupGraph {
            alphabet,
            out,
            inn,
        }
        .canonical())
    }
}
