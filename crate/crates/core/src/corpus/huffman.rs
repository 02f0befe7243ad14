use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::vocab::Vocabulary;

/// Binary Huffman codes over the real words of a vocabulary.
///
/// Indexed by vocabulary position; position 0 (NULL) has an empty code.
/// `path(w)[j]` is the internal node deciding bit `code(w)[j]`, listed from
/// the root down. Internal nodes are numbered in creation order, so the root
/// is `node_count() - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanCoding {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<usize>>,
    node_count: usize,
}

impl HuffmanCoding {
    pub fn build(vocab: &Vocabulary) -> Self {
        Self::from_word_counts(&vocab.word_counts())
    }

    /// Builds codes for words with the given counts (word `i` lands at
    /// position `i + 1`).
    ///
    /// Each merge takes the two smallest nodes, ties going to the node
    /// created first (leaves precede internal nodes, leaves in input order).
    /// The first node taken becomes the left child and emits bit 0.
    pub fn from_word_counts(counts: &[u64]) -> Self {
        let n = counts.len();
        let mut codes = vec![Vec::new(); n + 1];
        let mut paths = vec![Vec::new(); n + 1];
        if n < 2 {
            return HuffmanCoding {
                codes,
                paths,
                node_count: 0,
            };
        }

        // Node ids: leaves 0..n, internal nodes n..2n-1 in creation order.
        let mut parent = vec![usize::MAX; 2 * n - 1];
        let mut bit = vec![0u8; 2 * n - 1];
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| Reverse((c, i)))
            .collect();
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((c_left, left)) = heap.pop().unwrap();
            let Reverse((c_right, right)) = heap.pop().unwrap();
            parent[left] = next;
            parent[right] = next;
            bit[right] = 1;
            heap.push(Reverse((c_left + c_right, next)));
            next += 1;
        }
        let root = next - 1;

        for leaf in 0..n {
            let (mut code, mut path) = (Vec::new(), Vec::new());
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push(node - n);
            }
            code.reverse();
            path.reverse();
            codes[leaf + 1] = code;
            paths[leaf + 1] = path;
        }
        HuffmanCoding {
            codes,
            paths,
            node_count: n - 1,
        }
    }

    pub fn code(&self, position: usize) -> &[u8] {
        &self.codes[position]
    }

    pub fn path(&self, position: usize) -> &[usize] {
        &self.paths[position]
    }

    /// Number of internal nodes (one fewer than the number of words).
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of coded words.
    pub fn n_words(&self) -> usize {
        self.codes.len() - 1
    }
}
