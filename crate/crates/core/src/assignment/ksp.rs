//! K cheapest source-to-sink paths through a layered DAG.
//!
//! Every path crosses each layer exactly once, so a per-node k-best list
//! with back pointers is exact. Ties are ordered lexicographically by the
//! sequence of arc ids along the path.

use std::cmp::Ordering;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Arc<T> {
    layer: usize,
    from: usize,
    to: usize,
    weight: T,
}

/// Layer 0 holds the source and the last layer the sink (one node each).
/// Arcs connect a node of layer `i` to a node of layer `i + 1`.
#[derive(Debug, Clone)]
pub struct LayeredDag<T> {
    layer_sizes: Vec<usize>,
    arcs: Vec<Arc<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    /// Arc ids in traversal order.
    pub arcs: Vec<usize>,
    pub cost: T,
}

impl<T: Scalar> LayeredDag<T> {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        assert!(
            layer_sizes.first() == Some(&1) && layer_sizes.last() == Some(&1),
            "source and sink layers must hold exactly one node"
        );
        Self {
            layer_sizes,
            arcs: Vec::new(),
        }
    }

    /// Adds an arc from `from` in `layer` to `to` in `layer + 1`; returns its id.
    pub fn add_arc(&mut self, layer: usize, from: usize, to: usize, weight: T) -> usize {
        assert!(layer + 1 < self.layer_sizes.len(), "arc leaves the last layer");
        assert!(from < self.layer_sizes[layer] && to < self.layer_sizes[layer + 1]);
        self.arcs.push(Arc {
            layer,
            from,
            to,
            weight,
        });
        self.arcs.len() - 1
    }

    /// Chain of single-node layers with two parallel arcs per step; for step
    /// `i` arc `2i` carries `choices[i].0` and arc `2i + 1` carries
    /// `choices[i].1`.
    pub fn binary_choices(choices: &[(T, T)]) -> Self {
        let mut dag = Self::new(vec![1; choices.len() + 1]);
        for (i, &(a, b)) in choices.iter().enumerate() {
            dag.add_arc(i, 0, 0, a);
            dag.add_arc(i, 0, 0, b);
        }
        dag
    }

    pub fn layers(&self) -> usize {
        self.layer_sizes.len()
    }
}

#[derive(Clone, Copy)]
struct Entry<T> {
    cost: T,
    arc: usize,
    pred: usize,
    lex: usize,
}

/// Up to `k` cheapest paths in nondecreasing cost order. Arcs with
/// non-finite weight are treated as absent.
pub fn k_shortest_paths<T: Scalar>(dag: &LayeredDag<T>, k: usize) -> Vec<Path<T>> {
    if k == 0 {
        return Vec::new();
    }
    let layers = dag.layers();
    // entries[layer][node] -> k-best list
    let mut entries: Vec<Vec<Vec<Entry<T>>>> = Vec::with_capacity(layers);
    entries.push(vec![vec![Entry {
        cost: T::zero(),
        arc: usize::MAX,
        pred: usize::MAX,
        lex: 0,
    }]]);

    let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); layers];
    for (id, arc) in dag.arcs.iter().enumerate() {
        by_layer[arc.layer].push(id);
    }

    for layer in 0..layers - 1 {
        let prev = &entries[layer];
        let mut next: Vec<Vec<Entry<T>>> = vec![Vec::new(); dag.layer_sizes[layer + 1]];
        for &id in &by_layer[layer] {
            let arc = &dag.arcs[id];
            if !arc.weight.is_finite_value() {
                continue;
            }
            for (pi, e) in prev[arc.from].iter().enumerate() {
                next[arc.to].push(Entry {
                    cost: e.cost + arc.weight,
                    arc: id,
                    pred: pi,
                    lex: e.lex,
                });
            }
        }
        for list in &mut next {
            list.sort_by(|a, b| {
                a.cost
                    .partial_cmp(&b.cost)
                    .unwrap_or(Ordering::Equal)
                    .then(a.lex.cmp(&b.lex))
                    .then(a.arc.cmp(&b.arc))
            });
            list.truncate(k);
        }
        // lexicographic rank of every kept entry across the layer
        let mut order: Vec<(usize, usize, usize, usize)> = next
            .iter()
            .enumerate()
            .flat_map(|(node, list)| list.iter().enumerate().map(move |(i, e)| (e.lex, e.arc, node, i)))
            .collect();
        order.sort_unstable();
        for (rank, &(_, _, node, i)) in order.iter().enumerate() {
            next[node][i].lex = rank;
        }
        entries.push(next);
    }

    let sink = &entries[layers - 1][0];
    sink.iter()
        .map(|end| {
            let mut arcs = Vec::with_capacity(layers - 1);
            let mut e = *end;
            for layer in (1..layers).rev() {
                arcs.push(e.arc);
                let from = dag.arcs[e.arc].from;
                e = entries[layer - 1][from][e.pred];
            }
            arcs.reverse();
            Path { arcs, cost: end.cost }
        })
        .collect()
}
