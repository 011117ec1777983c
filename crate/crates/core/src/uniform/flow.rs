//! Bipartite assignment network and an integral max-flow (Dinic).

use std::collections::VecDeque;

use crate::error::Result;
use crate::model::Instance;

/// Network `s -> P_i -> J_j -> t` with capacity `c` on every source edge and
/// unit capacity on eligibility and sink edges.
///
/// Processors and tasks can be deleted, which removes their incident edges;
/// the peeling loop of the strongly-optimal solver shrinks the network this way.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    m: usize,
    n: usize,
    source_capacity: u64,
    /// `(processor, task)` pairs with `processor` in the task's eligibility set.
    eligibility: Vec<(usize, usize)>,
    proc_active: Vec<bool>,
    task_active: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Source,
    Sink,
    Processor(usize),
    Task(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
    pub capacity: u64,
}

impl FlowNetwork {
    pub fn new(inst: &Instance, source_capacity: u64) -> Self {
        let eligibility = inst
            .tasks
            .iter()
            .enumerate()
            .flat_map(|(j, t)| t.eligible.iter().map(move |&i| (i, j)))
            .collect();
        Self {
            m: inst.m,
            n: inst.n(),
            source_capacity,
            eligibility,
            proc_active: vec![true; inst.m],
            task_active: vec![true; inst.n()],
        }
    }

    pub fn num_processors(&self) -> usize {
        self.m
    }

    pub fn num_tasks(&self) -> usize {
        self.n
    }

    pub fn source_capacity(&self) -> u64 {
        self.source_capacity
    }

    pub fn set_source_capacity(&mut self, c: u64) {
        self.source_capacity = c;
    }

    pub fn is_processor_active(&self, i: usize) -> bool {
        self.proc_active[i]
    }

    pub fn is_task_active(&self, j: usize) -> bool {
        self.task_active[j]
    }

    pub fn active_tasks(&self) -> usize {
        self.task_active.iter().filter(|&&a| a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.active_tasks() == 0
    }

    /// Deletes a processor, the given tasks, and every edge touching them.
    pub fn remove(&mut self, processor: usize, tasks: &[usize]) {
        self.proc_active[processor] = false;
        for &j in tasks {
            self.task_active[j] = false;
        }
    }

    /// Active eligibility pairs `(processor, task)`.
    pub fn eligibility_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.eligibility
            .iter()
            .copied()
            .filter(|&(i, j)| self.proc_active[i] && self.task_active[j])
    }

    /// All edges of the current network: source edges, eligibility edges,
    /// then sink edges.
    pub fn edges(&self) -> Vec<Edge> {
        let c = self.source_capacity;
        let source = (0..self.m).filter(|&i| self.proc_active[i]).map(|i| Edge {
            from: Node::Source,
            to: Node::Processor(i),
            capacity: c,
        });
        let middle = self.eligibility_edges().map(|(i, j)| Edge {
            from: Node::Processor(i),
            to: Node::Task(j),
            capacity: 1,
        });
        let sink = (0..self.n).filter(|&j| self.task_active[j]).map(|j| Edge {
            from: Node::Task(j),
            to: Node::Sink,
            capacity: 1,
        });
        source.chain(middle).chain(sink).collect()
    }
}

/// Builds the network for a uniform-work instance.
pub fn build_network(inst: &Instance, c: u64) -> Result<FlowNetwork> {
    inst.validate()?;
    inst.uniform_work()?;
    Ok(FlowNetwork::new(inst, c))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: usize,
    /// `matching[j] = Some(i)` when a unit of flow runs `P_i -> J_j`.
    pub matching: Vec<Option<usize>>,
}

impl FlowResult {
    pub fn tasks_on(&self, processor: usize) -> Vec<usize> {
        self.matching
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == Some(processor))
            .map(|(j, _)| j)
            .collect()
    }
}

/// Integral maximum flow from `s` to `t`.
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let m = net.m;
    let node = |v: Node| match v {
        Node::Source => 0,
        Node::Sink => 1,
        Node::Processor(i) => 2 + i,
        Node::Task(j) => 2 + m + j,
    };
    let mut dinic = Dinic::new(2 + m + net.n);
    let mut middle = Vec::new();
    for e in net.edges() {
        let id = dinic.add_edge(node(e.from), node(e.to), e.capacity);
        if let (Node::Processor(i), Node::Task(j)) = (e.from, e.to) {
            middle.push((id, i, j));
        }
    }
    let value = dinic.run(0, 1);
    let mut matching = vec![None; net.n];
    for (id, i, j) in middle {
        if dinic.flow(id) > 0 {
            matching[j] = Some(i);
        }
    }
    FlowResult {
        value: value as usize,
        matching,
    }
}

struct Arc {
    to: usize,
    cap: u64,
}

struct Dinic {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
    original: Vec<u64>,
}

impl Dinic {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            level: vec![0; nodes],
            iter: vec![0; nodes],
            original: Vec::new(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap });
        self.arcs.push(Arc { to: from, cap: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        self.original.push(cap);
        id
    }

    fn flow(&self, id: usize) -> u64 {
        self.original[id / 2] - self.arcs[id].cap
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &id in &self.adj[v] {
                let arc = &self.arcs[id];
                if arc.cap > 0 && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[v] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, limit: u64) -> u64 {
        if v == t {
            return limit;
        }
        while self.iter[v] < self.adj[v].len() {
            let id = self.adj[v][self.iter[v]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > 0 && self.level[to] == self.level[v] + 1 {
                let pushed = self.dfs(to, t, limit.min(cap));
                if pushed > 0 {
                    self.arcs[id].cap -= pushed;
                    self.arcs[id ^ 1].cap += pushed;
                    return pushed;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    fn run(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        while self.bfs(s, t) {
            self.iter.fill(0);
            loop {
                let f = self.dfs(s, t, u64::MAX);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}
