use std::collections::BTreeMap;

use crate::agent::InteractionEvent;
use crate::csvio::CsvRecord;

/// Interaction counts per robot pair over `[window.0, window.1]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InteractionNetwork {
    pub nodes: Vec<u32>,
    /// `(id_a, id_b)` with `id_a < id_b` to count.
    pub edges: BTreeMap<(u32, u32), u32>,
    pub window: (f64, f64),
}

impl InteractionNetwork {
    pub fn degree(&self, id: u32) -> usize {
        self.edges.keys().filter(|(a, b)| *a == id || *b == id).count()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&c| u64::from(c)).sum()
    }

    pub fn rows(&self) -> Vec<NetworkEdgeRow> {
        self.edges
            .iter()
            .map(|(&(id_a, id_b), &count)| NetworkEdgeRow {
                id_a,
                id_b,
                count,
                window_start: self.window.0,
                window_end: self.window.1,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkStats {
    pub network: InteractionNetwork,
    /// Effective interactions per second over the window, by robot id.
    pub effective_rates: BTreeMap<u32, f64>,
    /// Robots with no edge in the window.
    pub isolated: Vec<u32>,
}

pub fn network_stats(events: &[InteractionEvent], nodes: &[u32], window: (f64, f64)) -> NetworkStats {
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let mut edges = BTreeMap::new();
    let mut effective: BTreeMap<u32, u64> = nodes.iter().map(|&n| (n, 0)).collect();
    for e in events.iter().filter(|e| e.t >= window.0 && e.t <= window.1) {
        let key = (e.id_a.min(e.id_b), e.id_a.max(e.id_b));
        *edges.entry(key).or_insert(0u32) += 1;
        if e.effective {
            for id in [e.id_a, e.id_b] {
                *effective.entry(id).or_insert(0) += 1;
            }
        }
    }
    let span = window.1 - window.0;
    let effective_rates = effective
        .into_iter()
        .map(|(id, c)| (id, if span > 0.0 { c as f64 / span } else { 0.0 }))
        .collect();
    let network = InteractionNetwork { nodes, edges, window };
    let isolated = network
        .nodes
        .iter()
        .copied()
        .filter(|&n| network.degree(n) == 0)
        .collect();
    NetworkStats {
        network,
        effective_rates,
        isolated,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkEdgeRow {
    pub id_a: u32,
    pub id_b: u32,
    pub count: u32,
    pub window_start: f64,
    pub window_end: f64,
}

impl CsvRecord for NetworkEdgeRow {
    fn header() -> &'static [&'static str] {
        &["id_a", "id_b", "count", "window_start", "window_end"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.id_a.to_string(),
            self.id_b.to_string(),
            self.count.to_string(),
            self.window_start.to_string(),
            self.window_end.to_string(),
        ]
    }
}
