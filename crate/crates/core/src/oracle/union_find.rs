/// Disjoint sets over `0..len` with path halving and union by size.
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        assert!(len <= u32::MAX as usize);
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    /// Rebuilds the forest from finalized labels (each label is a member of
    /// its class and labels itself).
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut size = vec![0u32; labels.len()];
        for &l in labels {
            size[l as usize] += 1;
        }
        for (i, s) in size.iter_mut().enumerate() {
            if labels[i] != i as u32 {
                *s = 1;
            }
        }
        Self {
            parent: labels.to_vec(),
            size,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }

    /// Labels every index with the smallest index in its class.
    pub fn labels(&mut self) -> Vec<u32> {
        let mut min_of = vec![u32::MAX; self.len()];
        let mut out = vec![0u32; self.len()];
        for i in 0..self.len() as u32 {
            let root = self.find(i) as usize;
            if min_of[root] == u32::MAX {
                min_of[root] = i;
            }
            out[i as usize] = min_of[root];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn labels_match_naive_closure(
            len in 1usize..60,
            pairs in proptest::collection::vec((0usize..60, 0usize..60), 0..80),
        ) {
            let pairs: Vec<_> = pairs.into_iter().map(|(a, b)| (a % len, b % len)).collect();
            let mut uf = UnionFind::new(len);
            for &(a, b) in &pairs {
                uf.union(a as u32, b as u32);
            }
            let labels = uf.labels();
            // naive: relabel to the minimum until stable
            let mut naive: Vec<usize> = (0..len).collect();
            loop {
                let mut changed = false;
                for &(a, b) in &pairs {
                    let m = naive[a].min(naive[b]);
                    for x in [a, b] {
                        if naive[x] != m {
                            naive[x] = m;
                            changed = true;
                        }
                    }
                }
                for i in 0..len {
                    let m = naive[naive[i]];
                    if m != naive[i] {
                        naive[i] = m;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            let naive: Vec<u32> = naive.into_iter().map(|x| x as u32).collect();
            prop_assert_eq!(&labels, &naive);

            let mut rebuilt = UnionFind::from_labels(&labels);
            prop_assert_eq!(rebuilt.labels(), labels);
        }
    }
}
