//! Novelty tables partitioned by goal count.

use std::collections::HashMap;

use super::State;

const DENSE_PAIR_LIMIT: usize = 1024;

enum Pairs {
    Dense(Vec<u32>),
    Sparse(HashMap<(u32, u32), u32>),
}

/// For each tuple, the smallest goal count of any state that contained it.
pub(crate) struct NoveltyTables {
    width: usize,
    n: usize,
    singles: Vec<usize>,
    pairs: Pairs,
}

impl NoveltyTables {
    pub fn new(num_atoms: usize, width: usize) -> Self {
        let pairs = if width >= 2 && num_atoms <= DENSE_PAIR_LIMIT {
            Pairs::Dense(vec![u32::MAX; num_atoms * num_atoms])
        } else {
            Pairs::Sparse(HashMap::new())
        };
        Self { width, n: num_atoms, singles: vec![usize::MAX; num_atoms], pairs }
    }

    fn pair_update(&mut self, a: usize, b: usize, h: usize) -> bool {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let h = h.min(u32::MAX as usize - 1) as u32;
        let slot = match &mut self.pairs {
            Pairs::Dense(v) => &mut v[a * self.n + b],
            Pairs::Sparse(m) => m.entry((a as u32, b as u32)).or_insert(u32::MAX),
        };
        if *slot > h {
            *slot = h;
            true
        } else {
            false
        }
    }

    /// Records every tuple of `state` under goal count `h` and returns the
    /// state's novelty: the size of its smallest new tuple, or `width + 1`.
    ///
    /// When `fresh` is given, only tuples involving those atoms are examined.
    /// That is exact whenever the parent was recorded with a goal count
    /// `<= h`, since all of the parent's tuples are then already at most `h`.
    pub fn record(&mut self, state: &State, h: usize, fresh: Option<&[usize]>) -> usize {
        let mut novelty = self.width + 1;
        let focus: Vec<usize> = match fresh {
            Some(f) => f.iter().copied().filter(|&a| state.contains(a)).collect(),
            None => state.ones().collect(),
        };
        for &a in &focus {
            if self.singles[a] > h {
                self.singles[a] = h;
                novelty = 1;
            }
        }
        if self.width >= 2 {
            let mut pair_new = false;
            match fresh {
                Some(_) => {
                    for &a in &focus {
                        for b in state.ones() {
                            if a != b && self.pair_update(a, b, h) {
                                pair_new = true;
                            }
                        }
                    }
                }
                None => {
                    for (i, &a) in focus.iter().enumerate() {
                        for &b in &focus[i + 1..] {
                            if self.pair_update(a, b, h) {
                                pair_new = true;
                            }
                        }
                    }
                }
            }
            if pair_new {
                novelty = novelty.min(2);
            }
        }
        novelty
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize, atoms: &[usize]) -> State {
        let mut s = State::with_capacity(n);
        for &a in atoms {
            s.insert(a);
        }
        s
    }

    #[test]
    fn partitioned_by_goal_count() {
        let mut t = NoveltyTables::new(4, 2);
        assert_eq!(t.record(&state(4, &[0, 1]), 2, None), 1);
        // same atoms and pairs at a worse goal count are not new
        assert_eq!(t.record(&state(4, &[0, 1]), 3, None), 3);
        // a better goal count makes them new again
        assert_eq!(t.record(&state(4, &[0, 1]), 1, None), 1);
        // new pair of known atoms
        assert_eq!(t.record(&state(4, &[0, 2]), 1, None), 1);
        assert_eq!(t.record(&state(4, &[1, 2]), 1, None), 2);
    }

    #[test]
    fn fresh_matches_full_scan_when_h_not_lower() {
        let mut full = NoveltyTables::new(5, 2);
        let mut inc = NoveltyTables::new(5, 2);
        let parent = state(5, &[0, 1]);
        full.record(&parent, 2, None);
        inc.record(&parent, 2, None);
        let child = state(5, &[0, 1, 3]);
        assert_eq!(full.record(&child, 2, None), inc.record(&child, 2, Some(&[3])));
        let child2 = state(5, &[1, 3, 4]);
        assert_eq!(full.record(&child2, 3, None), inc.record(&child2, 3, Some(&[4])));
    }
}
