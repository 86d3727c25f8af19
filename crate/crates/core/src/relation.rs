//! Finite predicates and relations over an indexed state space.

use std::fmt;

/// Bitset over states `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    n: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = StateSet { n, words: vec![!0; n.div_ceil(64)] };
        s.trim();
        s
    }

    pub fn from_indices(n: usize, it: impl IntoIterator<Item = usize>) -> Self {
        let mut s = StateSet::empty(n);
        for i in it {
            s.insert(i);
        }
        s
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = StateSet::empty(n);
        for i in 0..n {
            if f(i) {
                s.insert(i);
            }
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "state index {i} out of bounds {}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }

    pub fn union(&self, o: &StateSet) -> StateSet {
        self.zip(o, |a, b| a | b)
    }

    pub fn intersection(&self, o: &StateSet) -> StateSet {
        self.zip(o, |a, b| a & b)
    }

    pub fn difference(&self, o: &StateSet) -> StateSet {
        self.zip(o, |a, b| a & !b)
    }

    pub fn complement(&self) -> StateSet {
        let mut s = StateSet { n: self.n, words: self.words.iter().map(|w| !w).collect() };
        s.trim();
        s
    }

    pub fn union_with(&mut self, o: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, o: &StateSet) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a &= b;
        }
    }

    fn zip(&self, o: &StateSet, f: impl Fn(u64, u64) -> u64) -> StateSet {
        assert_eq!(self.n, o.n, "state sets over different universes");
        StateSet { n: self.n, words: self.words.iter().zip(&o.words).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn is_subset(&self, o: &StateSet) -> bool {
        self.words.iter().zip(&o.words).all(|(a, b)| a & !b == 0)
    }

    /// Some element of `self \ o`, if any.
    pub fn first_outside(&self, o: &StateSet) -> Option<usize> {
        self.words
            .iter()
            .zip(&o.words)
            .enumerate()
            .find(|(_, (a, b))| *a & !*b != 0)
            .map(|(k, (a, b))| k * 64 + (a & !b).trailing_zeros() as usize)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Relation over states `0..n` in compressed adjacency form. Successor
/// lists are sorted and duplicate free.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Relation {
    pub fn from_successors(succ: Vec<Vec<u32>>) -> Self {
        let n = succ.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut s in succ {
            s.sort_unstable();
            s.dedup();
            for &t in &s {
                assert!((t as usize) < n, "successor {t} out of bounds {n}");
            }
            targets.extend(s);
            offsets.push(targets.len() as u32);
        }
        Relation { n, offsets, targets }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (a, b) in pairs {
            succ[a].push(b as u32);
        }
        Relation::from_successors(succ)
    }

    pub fn empty(n: usize) -> Self {
        Relation::from_successors(vec![Vec::new(); n])
    }

    pub fn identity(n: usize) -> Self {
        Relation::from_successors((0..n as u32).map(|i| vec![i]).collect())
    }

    /// Identity restricted to `p`.
    pub fn guard(p: &StateSet) -> Self {
        Relation::from_successors(
            (0..p.universe()).map(|i| if p.contains(i) { vec![i as u32] } else { vec![] }).collect(),
        )
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn succ(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.succ(a).binary_search(&(b as u32)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |a| self.succ(a).iter().map(move |&b| (a, b as usize)))
    }

    /// `self ⨟ o`: first `self`, then `o`.
    pub fn compose(&self, o: &Relation) -> Relation {
        assert_eq!(self.n, o.n);
        Relation::from_successors(
            (0..self.n)
                .map(|a| self.succ(a).iter().flat_map(|&m| o.succ(m as usize).iter().copied()).collect())
                .collect(),
        )
    }

    pub fn union(&self, o: &Relation) -> Relation {
        assert_eq!(self.n, o.n);
        Relation::from_successors((0..self.n).map(|a| [self.succ(a), o.succ(a)].concat()).collect())
    }

    pub fn inverse(&self) -> Relation {
        Relation::from_pairs(self.n, self.pairs().map(|(a, b)| (b, a)))
    }

    pub fn is_subset(&self, o: &Relation) -> bool {
        self.first_pair_outside(o).is_none()
    }

    pub fn first_pair_outside(&self, o: &Relation) -> Option<(usize, usize)> {
        self.pairs().find(|&(a, b)| !o.contains(a, b))
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|a| self.succ(a) == [a as u32])
    }

    pub fn domain(&self) -> StateSet {
        StateSet::from_fn(self.n, |a| !self.succ(a).is_empty())
    }

    /// `R[P]`, the image of `p`.
    pub fn image(&self, p: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.n);
        for a in p.iter() {
            for &b in self.succ(a) {
                out.insert(b as usize);
            }
        }
        out
    }

    /// Reflexive-transitive closure.
    pub fn star(&self) -> Relation {
        let succ = (0..self.n)
            .map(|a| {
                let mut seen = StateSet::empty(self.n);
                let mut stack = vec![a];
                seen.insert(a);
                while let Some(x) = stack.pop() {
                    for &y in self.succ(x) {
                        if !seen.contains(y as usize) {
                            seen.insert(y as usize);
                            stack.push(y as usize);
                        }
                    }
                }
                seen.iter().map(|i| i as u32).collect()
            })
            .collect();
        Relation::from_successors(succ)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

/// Weakest liberal precondition: states all of whose `r`-successors lie in `p`.
pub fn wlp(r: &Relation, p: &StateSet) -> StateSet {
    StateSet::from_fn(r.universe(), |a| r.succ(a).iter().all(|&b| p.contains(b as usize)))
}

/// States with no `r`-successor.
pub fn dis(r: &Relation) -> StateSet {
    wlp(r, &StateSet::empty(r.universe()))
}

/// Dense relation used for the simulation fixpoint: one bitset row per state.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn empty(n: usize) -> Self {
        let stride = n.div_ceil(64);
        BitMatrix { n, stride, bits: vec![0; n * stride] }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn row(&self, a: usize) -> &[u64] {
        &self.bits[a * self.stride..(a + 1) * self.stride]
    }

    pub fn row_mut(&mut self, a: usize) -> &mut [u64] {
        &mut self.bits[a * self.stride..(a + 1) * self.stride]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.row(a)[b / 64] >> (b % 64) & 1 == 1
    }

    pub fn set(&mut self, a: usize, b: usize, v: bool) {
        let w = &mut self.row_mut(a)[b / 64];
        if v {
            *w |= 1 << (b % 64);
        } else {
            *w &= !(1 << (b % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn row_iter(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(a).iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }

    pub fn to_relation(&self) -> Relation {
        Relation::from_successors((0..self.n).map(|a| self.row_iter(a).map(|b| b as u32).collect()).collect())
    }

    pub fn from_relation(r: &Relation) -> Self {
        let mut m = BitMatrix::empty(r.universe());
        for (a, b) in r.pairs() {
            m.set(a, b, true);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a = StateSet::from_indices(70, [1, 65, 69]);
        let b = StateSet::from_indices(70, [1, 2]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![1]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(StateSet::full(70).len(), 70);
        assert_eq!(a.complement().len(), 67);
        assert_eq!(a.first_outside(&b), Some(65));
        assert!(StateSet::empty(70).is_subset(&a));
    }

    #[test]
    fn wlp_and_dis() {
        let r = Relation::from_pairs(3, [(0, 1), (0, 2), (1, 2)]);
        let p = StateSet::from_indices(3, [2]);
        assert_eq!(wlp(&r, &p).iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(dis(&r).iter().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn compose_and_star() {
        let r = Relation::from_pairs(3, [(0, 1), (1, 2)]);
        assert_eq!(r.compose(&r).pairs().collect::<Vec<_>>(), vec![(0, 2)]);
        assert_eq!(r.star().len(), 6);
        assert!(Relation::identity(3).is_subset(&r.star()));
    }
}
