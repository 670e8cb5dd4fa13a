use crate::error::{Error, Result};

/// Undirected task topology: an edge between two tasks means robots doing
/// them can collaborate and one of them may switch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    m: usize,
    adjacency: Vec<bool>,
}

impl TaskGraph {
    /// Builds a graph over `m` tasks from an edge list. Edges are symmetric,
    /// self-edges are rejected and the result must be connected.
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if m < 2 {
            return Err(Error::Parameter(format!("task graph needs at least 2 tasks, got {m}")));
        }
        let mut adjacency = vec![false; m * m];
        for &(i, j) in edges {
            if i >= m || j >= m {
                return Err(Error::Parameter(format!("edge ({i}, {j}) out of range for {m} tasks")));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-edge on task {i}")));
            }
            adjacency[i * m + j] = true;
            adjacency[j * m + i] = true;
        }
        let graph = Self { m, adjacency };
        if !graph.is_connected() {
            return Err(Error::Parameter("task graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn complete(m: usize) -> Result<Self> {
        let edges: Vec<_> = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .collect();
        Self::new(m, &edges)
    }

    pub fn task_count(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.m && j < self.m && self.adjacency[i * self.m + j]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |i| {
            (i + 1..self.m).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.m {
                if self.has_edge(i, j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
