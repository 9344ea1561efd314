//! Fixed-width bit-vector over element ranks.

/// Set of group elements, addressed by lexicographic rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RankSet {
    words: Vec<u64>,
    len: usize,
}

impl RankSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn universe_len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, rank: usize) -> bool {
        debug_assert!(rank < self.len);
        self.words[rank >> 6] >> (rank & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, rank: usize) -> bool {
        debug_assert!(rank < self.len);
        let word = &mut self.words[rank >> 6];
        let bit = 1u64 << (rank & 63);
        let fresh = *word & bit == 0;
        *word |= bit;
        fresh
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &RankSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_iter_count() {
        let mut s = RankSet::new(130);
        assert!(s.is_empty());
        for r in [0, 5, 63, 64, 129] {
            assert!(s.insert(r));
        }
        assert!(!s.insert(5));
        assert_eq!(s.count(), 5);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 63, 64, 129]);
        assert!(s.contains(129) && !s.contains(128));
    }

    #[test]
    fn union() {
        let mut a = RankSet::new(10);
        let mut b = RankSet::new(10);
        a.insert(1);
        b.insert(9);
        a.union_with(&b);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![1, 9]);
    }
}
