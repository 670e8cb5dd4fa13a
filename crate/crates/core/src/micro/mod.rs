//! Point-particle agents in a rectangular arena.
//!
//! Agents move ballistically and switch tasks when two of them come within
//! the interaction radius of a nonzero channel. The radius turns a
//! macroscopic rate into a contact distance: for rate `k` between
//! populations `n_i`, `n_j` moving with relative speed `v` in an arena of
//! area `A`, the interaction area is `a = A k / (v n_i n_j)` and the radius
//! `sqrt(a / pi)`. Under feedback the numerator becomes
//! `A alpha (n*_i - n_i)` and only `n_j` stays in the denominator.
//!
//! Populations come either from global counts (centralized) or from each
//! agent's own neighborhood of radius `R` (distributed), with the desired
//! counts rescaled to the neighborhood size.

mod grid;

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{self, Write};

use rand::Rng;

pub use grid::{distance, pairs_exhaustive, Point, SpatialGrid};

use crate::ensemble::{FeedbackGains, PayoffMatrix};
use crate::error::{Error, Result};
use crate::odeint::{Trajectory, TrajectoryMeta};
use crate::rng::trial_rng;
use crate::ssa::{CountVector, Direction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::Parameter(format!("arena must have positive size, got {width} x {height}")));
        }
        Ok(Self { width, height })
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    /// Radii never exceed half the shorter side.
    pub fn radius_cap(&self) -> f64 {
        0.5 * self.width.min(self.height)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p[0]) && (0.0..=self.height).contains(&p[1])
    }
}

/// Contact radius for an uncontrolled channel of rate `k` (sign ignored).
pub fn interaction_radius(arena: &Arena, k: f64, v: f64, n_i: u32, n_j: u32) -> Result<f64> {
    if !(v > 0.0) || n_i == 0 || n_j == 0 {
        return Err(Error::DegenerateInput(format!(
            "interaction radius needs positive speed and counts (v = {v}, n_i = {n_i}, n_j = {n_j})"
        )));
    }
    let a = arena.area() * k.abs() / (v * f64::from(n_i) * f64::from(n_j));
    Ok((a / PI).sqrt().min(arena.radius_cap()))
}

/// Contact radius and switch direction for a feedback channel. A positive
/// error `n*_i - n_i` pulls task-`j` robots into task `i`; a negative one
/// pushes task-`i` robots out to `j`.
pub fn interaction_radius_controlled(
    arena: &Arena,
    alpha: f64,
    desired_i: f64,
    n_i: f64,
    n_j: u32,
    v: f64,
) -> Result<(f64, Direction)> {
    if n_j == 0 || !(v > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "controlled radius needs a positive partner count and speed (n_j = {n_j}, v = {v})"
        )));
    }
    let error = desired_i - n_i;
    let a = arena.area() * alpha * error / (v * f64::from(n_j));
    let r = (a.abs() / PI).sqrt().min(arena.radius_cap());
    Ok((r, Direction::from_rate(error)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub position: Point,
    pub heading: f64,
    pub speed: f64,
    pub task: usize,
    pub sensing_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    /// Every agent knows the global counts.
    Centralized,
    /// Each agent counts tasks within its sensing radius, itself included.
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Rotate the heading by +pi/2 until it points back inside.
    QuarterTurn,
    /// Mirror the velocity component normal to the wall.
    Specular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncounterSearch {
    Grid,
    /// All pairs, O(n^2). Used to check the grid.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    Rates(PayoffMatrix),
    Feedback(FeedbackGains),
}

impl Interaction {
    pub fn dim(&self) -> usize {
        match self {
            Interaction::Rates(k) => k.dim(),
            Interaction::Feedback(g) => g.dim(),
        }
    }

    fn channel_weight(&self, i: usize, j: usize) -> f64 {
        match self {
            Interaction::Rates(k) => k.get(i, j),
            Interaction::Feedback(g) => g.get(i, j),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroParams {
    pub arena: Arena,
    pub interaction: Interaction,
    pub estimation: Estimation,
    /// Relative speed used in the radius formulas; defaults to the sum of
    /// the two agents' speeds.
    pub relative_speed: Option<f64>,
    pub boundary: Boundary,
    pub search: EncounterSearch,
    pub extinction_guard: bool,
}

/// One task switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encounter {
    pub t: f64,
    /// Lower id of the pair; its estimate sets the radius.
    pub initiator: usize,
    pub partner: usize,
    /// Channel `(i, j)` that fired.
    pub channel: (usize, usize),
    pub direction: Direction,
    /// Agent that changed task.
    pub switched: usize,
    pub from_task: usize,
    pub to_task: usize,
    pub distance: f64,
    pub radius: f64,
}

/// Population estimate seen by one agent.
#[derive(Debug, Clone, PartialEq)]
struct Estimate {
    counts: Vec<u32>,
    size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub arena: Arena,
    pub agents: Vec<AgentState>,
    pub clock: f64,
    pub mode: Estimation,
    tasks: usize,
    refractory: BTreeSet<(usize, usize)>,
}

impl World {
    pub fn new(arena: Arena, agents: Vec<AgentState>, tasks: usize, mode: Estimation) -> Result<Self> {
        for (idx, a) in agents.iter().enumerate() {
            if a.id != idx {
                return Err(Error::Parameter(format!("agent at index {idx} has id {}", a.id)));
            }
            if a.task >= tasks {
                return Err(Error::Parameter(format!("agent {idx} has task {} of {tasks}", a.task)));
            }
            if !arena.contains(a.position) {
                return Err(Error::Parameter(format!("agent {idx} starts outside the arena")));
            }
            if !(a.speed >= 0.0 && a.speed.is_finite()) {
                return Err(Error::Parameter(format!("agent {idx} has invalid speed {}", a.speed)));
            }
        }
        Ok(Self { arena, agents, clock: 0.0, mode, tasks, refractory: BTreeSet::new() })
    }

    pub fn task_count(&self) -> usize {
        self.tasks
    }

    pub fn counts(&self) -> Vec<u32> {
        let mut c = vec![0; self.tasks];
        for a in &self.agents {
            c[a.task] += 1;
        }
        c
    }

    /// Pairs currently in contact that already switched.
    pub fn refractory(&self) -> &BTreeSet<(usize, usize)> {
        &self.refractory
    }

    fn positions(&self) -> Vec<Point> {
        self.agents.iter().map(|a| a.position).collect()
    }
}

/// Task counts among agents within `agent.sensing_radius` (inclusive),
/// including the agent itself.
pub fn estimate_populations(agent: &AgentState, world: &World) -> CountVector {
    let mut c = vec![0; world.tasks];
    for other in &world.agents {
        if other.id == agent.id || distance(other.position, agent.position) <= agent.sensing_radius {
            c[other.task] += 1;
        }
    }
    CountVector::new(c).expect("neighborhood always contains the agent")
}

/// Agents within each agent's sensing radius (itself included). Positions
/// are fixed while a step resolves encounters, so these lists are too.
fn neighborhoods(world: &World) -> Vec<Vec<usize>> {
    let positions = world.positions();
    let r_max = world.agents.iter().map(|a| a.sensing_radius).fold(0.0, f64::max);
    let grid = (r_max > 0.0 && r_max.is_finite()).then(|| SpatialGrid::new(&positions, r_max));
    world
        .agents
        .iter()
        .map(|agent| match &grid {
            Some(g) => g.within(&positions, agent.position, agent.sensing_radius),
            None if r_max.is_infinite() => (0..positions.len()).collect(),
            None => vec![agent.id],
        })
        .collect()
}

/// Current estimate of agent `id`: global counts, or task counts over its
/// neighborhood, both reflecting switches already made this step.
fn estimate(world: &World, hoods: &[Vec<usize>], id: usize) -> Estimate {
    let counts = match world.mode {
        Estimation::Centralized => world.counts(),
        Estimation::Distributed => {
            let mut c = vec![0u32; world.tasks];
            for &q in &hoods[id] {
                c[world.agents[q].task] += 1;
            }
            c
        }
    };
    let size = counts.iter().sum();
    Estimate { counts, size }
}

/// Radius and direction of channel `(i, j)` under estimate `est`.
fn channel_radius(
    params: &MicroParams,
    est: &Estimate,
    desired: Option<&[f64]>,
    i: usize,
    j: usize,
    v: f64,
) -> Result<Option<(f64, Direction)>> {
    let w = params.interaction.channel_weight(i, j);
    if w == 0.0 || !(v > 0.0) {
        return Ok(None);
    }
    // The partner may sit outside the initiator's neighborhood.
    let n_i = est.counts[i].max(1);
    let n_j = est.counts[j].max(1);
    match &params.interaction {
        Interaction::Rates(_) => {
            let r = interaction_radius(&params.arena, w, v, n_i, n_j)?;
            Ok(Some((r, Direction::from_rate(w))))
        }
        Interaction::Feedback(_) => {
            let y_star = desired.expect("feedback needs a reference");
            let target = y_star[i] * f64::from(est.size);
            let (r, d) = interaction_radius_controlled(&params.arena, w, target, f64::from(est.counts[i]), n_j, v)?;
            Ok(Some((r, d)))
        }
    }
}

/// Among channels `(ta, tb)` and `(tb, ta)`, the one with the largest radius.
fn best_channel(
    params: &MicroParams,
    est: &Estimate,
    desired: Option<&[f64]>,
    ta: usize,
    tb: usize,
    v: f64,
) -> Result<Option<((usize, usize), f64, Direction)>> {
    if ta == tb {
        return Ok(None);
    }
    let mut best: Option<((usize, usize), f64, Direction)> = None;
    for (i, j) in [(ta.min(tb), ta.max(tb)), (ta.max(tb), ta.min(tb))] {
        if let Some((r, d)) = channel_radius(params, est, desired, i, j, v)? {
            if r > 0.0 && best.is_none_or(|(_, rb, _)| r > rb) {
                best = Some(((i, j), r, d));
            }
        }
    }
    Ok(best)
}

fn pair_speed(params: &MicroParams, a: &AgentState, b: &AgentState) -> f64 {
    params.relative_speed.unwrap_or(a.speed + b.speed)
}

/// Smallest positive relative speed over all pairs; radii scale as
/// `v^-1/2`, so this bounds the largest radius.
fn min_pair_speed(params: &MicroParams, agents: &[AgentState]) -> Option<f64> {
    if let Some(v) = params.relative_speed {
        return (v > 0.0).then_some(v);
    }
    let mut speeds: Vec<f64> = agents.iter().map(|a| a.speed).collect();
    speeds.sort_by(f64::total_cmp);
    match speeds.as_slice() {
        [a, b, ..] if a + b > 0.0 => Some(a + b),
        [_, _, ..] => speeds.iter().copied().find(|&s| s > 0.0),
        _ => None,
    }
}

fn advance(agent: &mut AgentState, arena: &Arena, boundary: Boundary, dt: f64) {
    let [mut x, mut y] = agent.position;
    x += agent.speed * dt * agent.heading.cos();
    y += agent.speed * dt * agent.heading.sin();
    let left = x < 0.0;
    let right = x > arena.width;
    let bottom = y < 0.0;
    let top = y > arena.height;
    agent.position = [x.clamp(0.0, arena.width), y.clamp(0.0, arena.height)];
    if !(left || right || bottom || top) {
        return;
    }
    match boundary {
        Boundary::QuarterTurn => {
            let inward = |h: f64| {
                (!left || h.cos() > 0.0)
                    && (!right || h.cos() < 0.0)
                    && (!bottom || h.sin() > 0.0)
                    && (!top || h.sin() < 0.0)
            };
            let mut h = agent.heading;
            for _ in 0..4 {
                if inward(h) {
                    break;
                }
                h = (h + FRAC_PI_2).rem_euclid(TAU);
            }
            if !inward(h) {
                // axis-aligned heading into a corner: head for the center
                let c = [arena.width / 2.0, arena.height / 2.0];
                h = (c[1] - agent.position[1]).atan2(c[0] - agent.position[0]).rem_euclid(TAU);
            }
            agent.heading = h;
        }
        Boundary::Specular => {
            let mut h = agent.heading;
            if left || right {
                h = PI - h;
            }
            if bottom || top {
                h = -h;
            }
            agent.heading = h.rem_euclid(TAU);
        }
    }
}

/// Advances the world by `dt`: motion, boundary handling, radius update,
/// task switches for pairs in contact, and refractory release.
///
/// Pairs are resolved in ascending `(lower id, higher id)` order using the
/// lower id's estimate. Estimates are read when the pair is resolved, so a
/// switch earlier in the step shrinks the radii of later pairs; without
/// this every pair in contact would act on the same stale error and
/// overshoot.
pub fn step_world(
    world: &mut World,
    params: &MicroParams,
    dt: f64,
    reference: Option<&Trajectory>,
) -> Result<Vec<Encounter>> {
    for agent in &mut world.agents {
        advance(agent, &params.arena, params.boundary, dt);
    }
    world.clock += dt;

    let desired = match (&params.interaction, reference) {
        (Interaction::Feedback(_), Some(r)) => Some(r.sample(world.clock.min(r.t_end()))?.into_inner()),
        (Interaction::Feedback(_), None) => {
            return Err(Error::Parameter("feedback interaction needs a reference trajectory".into()))
        }
        _ => None,
    };
    let desired = desired.as_deref();

    let hoods = match world.mode {
        Estimation::Centralized => Vec::new(),
        Estimation::Distributed => neighborhoods(world),
    };

    // Largest radius any pair could reach this step: one robot on each side
    // of a channel and, under feedback, the whole estimate as error.
    let mut cutoff: f64 = 0.0;
    if let Some(v) = min_pair_speed(params, &world.agents) {
        let size = match world.mode {
            Estimation::Centralized => world.agents.len(),
            Estimation::Distributed => hoods.iter().map(Vec::len).max().unwrap_or(1),
        } as f64;
        let area = params.arena.area();
        for i in 0..world.tasks {
            for j in 0..world.tasks {
                let w = params.interaction.channel_weight(i, j).abs();
                let a = match params.interaction {
                    Interaction::Rates(_) => area * w / v,
                    Interaction::Feedback(_) => area * w * size / v,
                };
                cutoff = cutoff.max((a / PI).sqrt().min(params.arena.radius_cap()));
            }
        }
    }

    let positions = world.positions();
    let candidates = if cutoff > 0.0 {
        match params.search {
            EncounterSearch::Grid => SpatialGrid::new(&positions, cutoff).pairs(&positions),
            EncounterSearch::Exhaustive => pairs_exhaustive(&positions, cutoff),
        }
    } else {
        Vec::new()
    };

    let mut live = world.counts();
    let mut encounters = Vec::new();
    for (p, q) in candidates {
        if world.refractory.contains(&(p, q)) {
            continue;
        }
        let (a, b) = (&world.agents[p], &world.agents[q]);
        let d = distance(a.position, b.position);
        let v = pair_speed(params, a, b);
        let Some(((i, j), r, dir)) = best_channel(params, &estimate(world, &hoods, p), desired, a.task, b.task, v)? else {
            continue;
        };
        if d >= r {
            continue;
        }
        let (from, to) = match dir {
            Direction::Forward => (j, i),
            Direction::Reverse => (i, j),
        };
        if params.extinction_guard && live[from] <= 1 {
            continue;
        }
        let switched = if a.task == from { p } else { q };
        world.agents[switched].task = to;
        live[from] -= 1;
        live[to] += 1;
        world.refractory.insert((p, q));
        encounters.push(Encounter {
            t: world.clock,
            initiator: p,
            partner: q,
            channel: (i, j),
            direction: dir,
            switched,
            from_task: from,
            to_task: to,
            distance: d,
            radius: r,
        });
    }

    let mut released = Vec::new();
    for &(p, q) in &world.refractory {
        let (a, b) = (&world.agents[p], &world.agents[q]);
        let v = pair_speed(params, a, b);
        let r = best_channel(params, &estimate(world, &hoods, p), desired, a.task, b.task, v)?.map_or(0.0, |(_, r, _)| r);
        if distance(a.position, b.position) > r {
            released.push((p, q));
        }
    }
    for pair in released {
        world.refractory.remove(&pair);
    }
    Ok(encounters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroConfig {
    pub params: MicroParams,
    pub counts0: CountVector,
    pub speed: f64,
    /// Sensing radius for distributed estimation.
    pub sensing_radius: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Record fractions every this many steps.
    pub sample_every: usize,
    pub record_snapshots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub id: usize,
    pub position: Point,
    pub heading: f64,
    pub task: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroRun {
    /// Task fractions on the sampling grid.
    pub trajectory: Trajectory,
    pub encounters: Vec<Encounter>,
    pub snapshots: Vec<Snapshot>,
    pub seed: u64,
    pub stream: u64,
}

impl MicroRun {
    /// `t,initiator,partner,pair_i,pair_j,direction,agent,from,to,distance,radius`
    /// (1-based task indices).
    pub fn write_encounters_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# seed={}, stream={}", self.seed, self.stream)?;
        writeln!(w, "t,initiator,partner,pair_i,pair_j,direction,agent,from,to,distance,radius")?;
        for e in &self.encounters {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                e.t,
                e.initiator,
                e.partner,
                e.channel.0 + 1,
                e.channel.1 + 1,
                e.direction.sign(),
                e.switched,
                e.from_task + 1,
                e.to_task + 1,
                e.distance,
                e.radius
            )?;
        }
        Ok(())
    }

    /// `t,id,x,y,heading,task` per agent per step.
    pub fn write_snapshots_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,id,x,y,heading,task")?;
        for s in &self.snapshots {
            writeln!(w, "{},{},{},{},{},{}", s.t, s.id, s.position[0], s.position[1], s.heading, s.task + 1)?;
        }
        Ok(())
    }
}

/// Places agents uniformly at random with uniform headings; agent ids are
/// assigned task by task in the order of `counts0`.
pub fn spawn_world<R: Rng + ?Sized>(config: &MicroConfig, rng: &mut R) -> Result<World> {
    let arena = config.params.arena;
    let mut agents = Vec::new();
    for (task, &n) in config.counts0.as_slice().iter().enumerate() {
        for _ in 0..n {
            let x = rng.random::<f64>() * arena.width;
            let y = rng.random::<f64>() * arena.height;
            let heading = rng.random::<f64>() * TAU;
            agents.push(AgentState {
                id: agents.len(),
                position: [x, y],
                heading,
                speed: config.speed,
                task,
                sensing_radius: config.sensing_radius,
            });
        }
    }
    World::new(arena, agents, config.counts0.dim(), config.params.estimation)
}

/// Runs one seeded trial on stream `stream` of master seed `seed`.
pub fn run_micro(config: &MicroConfig, reference: Option<&Trajectory>, seed: u64, stream: u64) -> Result<MicroRun> {
    let m = config.params.interaction.dim();
    if config.counts0.dim() != m {
        return Err(Error::Dimension { expected: m, got: config.counts0.dim() });
    }
    if (config.counts0.total() as usize) < m {
        return Err(Error::Parameter(format!("{} agents cannot cover {m} tasks", config.counts0.total())));
    }
    if config.params.extinction_guard && config.counts0.min() == 0 {
        return Err(Error::Parameter("extinction guard needs every initial count >= 1".into()));
    }
    if !(config.dt > 0.0) || !(config.t_end >= config.dt) || config.sample_every == 0 {
        return Err(Error::Parameter("need dt > 0, t_end >= dt and sample_every >= 1".into()));
    }
    if !(config.speed >= 0.0) {
        return Err(Error::Parameter(format!("speed must be nonnegative, got {}", config.speed)));
    }
    if config.params.estimation == Estimation::Distributed && !(config.sensing_radius > 0.0) {
        return Err(Error::Parameter("distributed estimation needs a positive sensing radius".into()));
    }
    let steps = (config.t_end / config.dt).round();
    if (steps * config.dt - config.t_end).abs() > 1e-9 * config.t_end.max(1.0) {
        return Err(Error::Parameter(format!("t_end = {} is not a multiple of dt = {}", config.t_end, config.dt)));
    }
    let steps = steps as usize;
    if let (Interaction::Feedback(_), Some(r)) = (&config.params.interaction, reference) {
        if r.t_end() + 1e-9 < config.t_end {
            return Err(Error::Parameter(format!("reference ends at {} before t_end {}", r.t_end(), config.t_end)));
        }
    }

    let mut rng = trial_rng(seed, stream);
    let mut world = spawn_world(config, &mut rng)?;
    let n = f64::from(config.counts0.total());
    let fractions = |w: &World| w.counts().iter().map(|&c| f64::from(c) / n).collect::<Vec<f64>>();

    let mut times = vec![0.0];
    let mut states = vec![fractions(&world)];
    let mut encounters = Vec::new();
    let mut snapshots = Vec::new();
    let snap = |w: &World, t: f64, out: &mut Vec<Snapshot>| {
        out.extend(w.agents.iter().map(|a| Snapshot { t, id: a.id, position: a.position, heading: a.heading, task: a.task }));
    };
    if config.record_snapshots {
        snap(&world, 0.0, &mut snapshots);
    }
    for k in 1..=steps {
        encounters.extend(step_world(&mut world, &config.params, config.dt, reference)?);
        let t = k as f64 * config.dt;
        world.clock = t;
        if config.record_snapshots {
            snap(&world, t, &mut snapshots);
        }
        if k % config.sample_every == 0 {
            times.push(t);
            states.push(fractions(&world));
        }
    }
    let meta = TrajectoryMeta::new("micro", format!("agents={}", config.counts0.total()));
    Ok(MicroRun { trajectory: Trajectory::new(times, states, meta)?, encounters, snapshots, seed, stream })
}
