//! Continuous genetic algorithm over two normalized genes in `[-1, 1]`.
//!
//! One generation:
//!
//! 1. evaluate every chromosome that is not already scored;
//! 2. sort by fitness (stable) and keep the top `⌊N_pop ρ_parent⌋` as the
//!    parent pool, of which `max(1, ⌊N_parents ρ_survival⌋)` survive;
//! 3. draw mother/father pairs by softmax over min-max normalized fitness,
//!    the father from the pool with the mother removed;
//! 4. cross each pair gene by gene: with probability 1/2 a uniform convex
//!    blend `γ p_m + (1 − γ) p_f`, otherwise the mother's gene;
//! 5. add `N(0, σ²)` noise to each gene of every chromosome but the elite
//!    with probability `ρ_mutation`, clipping to `[-1, 1]`.
//!
//! Random draws happen in a fixed order per generation (all pairings, then
//! all crossovers, then all mutations) from a single ChaCha8 stream, so a
//! seed reproduces a run exactly. Fitness evaluation draws nothing and runs
//! in parallel.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{map_gene, reconstruct_sec, EpsilonBudget, Family, GeneBounds, Reconstruction};
use crate::{Error, Result};

/// Fitness assigned to infeasible chromosomes and failed evaluations.
pub const WORST_FITNESS: f64 = f64::NEG_INFINITY;

pub const GENES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgaConfig {
    pub population: usize,
    pub iterations: usize,
    pub mutation_rate: f64,
    pub parent_rate: f64,
    pub survival_rate: f64,
    pub mutation_sigma: f64,
    pub seed: u64,
}

impl Default for CgaConfig {
    fn default() -> Self {
        CgaConfig {
            population: 200,
            iterations: 300,
            mutation_rate: 0.5,
            parent_rate: 0.5,
            survival_rate: 1.0,
            mutation_sigma: 0.2,
            seed: 1,
        }
    }
}

impl CgaConfig {
    pub fn n_parents(&self) -> usize {
        (self.population as f64 * self.parent_rate).floor() as usize
    }

    pub fn n_survivors(&self) -> usize {
        ((self.n_parents() as f64 * self.survival_rate).floor() as usize).max(1)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.population < 4 {
            v.push("cga.population: must be >= 4".to_owned());
        }
        for (key, rate) in [
            ("mutation_rate", self.mutation_rate),
            ("parent_rate", self.parent_rate),
            ("survival_rate", self.survival_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                v.push(format!("cga.{key}: must lie in [0, 1]"));
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            v.push("cga.mutation_sigma: must be >= 0".to_owned());
        }
        if self.n_parents() < 2 {
            v.push(
                "cga.parent_rate: population * parent_rate must give at least 2 parents".to_owned(),
            );
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chromosome {
    pub genes: [f64; GENES],
    /// `None` until evaluated; [`WORST_FITNESS`] when infeasible.
    pub fitness: Option<f64>,
    pub feasible: bool,
}

impl Chromosome {
    pub fn new(genes: [f64; GENES]) -> Self {
        Chromosome {
            genes,
            fitness: None,
            feasible: true,
        }
    }

    /// Fitness with unevaluated and NaN treated as worst.
    pub fn score(&self) -> f64 {
        match self.fitness {
            Some(f) if !f.is_nan() => f,
            _ => WORST_FITNESS,
        }
    }

    pub fn has_finite_fitness(&self) -> bool {
        self.score().is_finite()
    }
}

/// Result of scoring one gene vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub feasible: bool,
}

impl Evaluation {
    pub fn infeasible() -> Self {
        Evaluation {
            fitness: WORST_FITNESS,
            feasible: false,
        }
    }
}

/// Something the algorithm can maximize. Implementations must be pure.
pub trait Objective: Sync {
    fn evaluate(&self, genes: [f64; GENES]) -> Evaluation;
}

/// Wraps a plain function of the genes; every point is feasible.
pub struct GeneFn<F>(pub F);

impl<F> Objective for GeneFn<F>
where
    F: Fn([f64; GENES]) -> f64 + Sync,
{
    fn evaluate(&self, genes: [f64; GENES]) -> Evaluation {
        Evaluation {
            fitness: (self.0)(genes),
            feasible: true,
        }
    }
}

/// Key-rate objective: genes map linearly to `(ε_PE, ε_cor)` on
/// `[1e-21, ε)`, `ε_sec` is reconstructed from the total constraint, and
/// `rate_fn` scores the budget in bits/s.
pub struct BudgetObjective<F> {
    total: f64,
    family: Family,
    bounds: GeneBounds,
    rate_fn: F,
}

impl<F> BudgetObjective<F>
where
    F: Fn(&EpsilonBudget) -> Result<f64> + Sync,
{
    pub fn new(total: f64, family: Family, rate_fn: F) -> Result<Self> {
        Ok(BudgetObjective {
            total,
            family,
            bounds: GeneBounds::for_total(total)?,
            rate_fn,
        })
    }

    pub fn reconstruct(&self, genes: [f64; GENES]) -> Result<Reconstruction> {
        let eps_pe = map_gene(genes[0], self.bounds)?;
        let eps_cor = map_gene(genes[1], self.bounds)?;
        reconstruct_sec(self.total, eps_pe, eps_cor, self.family)
    }

    pub fn budget(&self, genes: [f64; GENES]) -> Option<EpsilonBudget> {
        self.reconstruct(genes)
            .ok()
            .and_then(Reconstruction::feasible)
    }
}

impl<F> Objective for BudgetObjective<F>
where
    F: Fn(&EpsilonBudget) -> Result<f64> + Sync,
{
    fn evaluate(&self, genes: [f64; GENES]) -> Evaluation {
        let budget = match self.reconstruct(genes) {
            Ok(Reconstruction::Feasible(b)) => b,
            _ => return Evaluation::infeasible(),
        };
        match (self.rate_fn)(&budget) {
            Ok(rate) if !rate.is_nan() => Evaluation {
                fitness: rate,
                feasible: true,
            },
            _ => Evaluation {
                fitness: WORST_FITNESS,
                feasible: true,
            },
        }
    }
}

fn uniform_chromosome<R: Rng + ?Sized>(rng: &mut R) -> Chromosome {
    Chromosome::new([rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
}

/// `N_pop` chromosomes with i.i.d. uniform genes.
pub fn initialize<R: Rng + ?Sized>(config: &CgaConfig, rng: &mut R) -> Vec<Chromosome> {
    (0..config.population)
        .map(|_| uniform_chromosome(rng))
        .collect()
}

/// Scores every unevaluated chromosome; returns how many were scored.
pub fn evaluate<O: Objective + ?Sized>(population: &mut [Chromosome], objective: &O) -> usize {
    population
        .par_iter_mut()
        .filter(|c| c.fitness.is_none())
        .map(|c| {
            let e = objective.evaluate(c.genes);
            c.fitness = Some(e.fitness);
            c.feasible = e.feasible;
            if !e.feasible {
                c.fitness = Some(WORST_FITNESS);
            }
        })
        .count()
}

fn sort_by_fitness(population: &mut [Chromosome]) {
    // stable: equal fitness keeps insertion order
    population.sort_by(|a, b| b.score().total_cmp(&a.score()));
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Best `N_parents` chromosomes, best first.
    pub parents: Vec<Chromosome>,
    pub n_survivors: usize,
}

pub fn select(population: &[Chromosome], config: &CgaConfig) -> Selection {
    let mut sorted = population.to_vec();
    sort_by_fitness(&mut sorted);
    sorted.truncate(config.n_parents().min(population.len()));
    Selection {
        parents: sorted,
        n_survivors: config.n_survivors(),
    }
}

/// Softmax selection probabilities over fitness min-max rescaled to
/// `[0, 1]`. Non-finite fitness gets probability 0; if every finite value is
/// equal the finite entries share the mass uniformly.
pub fn softmax_weights(fitness: &[f64]) -> Vec<f64> {
    let finite = fitness.iter().copied().filter(|f| f.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| {
        (lo.min(f), hi.max(f))
    });
    let span = hi - lo;
    let raw: Vec<f64> = fitness
        .iter()
        .map(|&f| {
            if !f.is_finite() {
                0.0
            } else if span > 0.0 {
                ((f - lo) / span).exp()
            } else {
                1.0
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return raw;
    }
    raw.into_iter().map(|w| w / total).collect()
}

/// Softmax sampler over a parent pool.
#[derive(Debug, Clone)]
pub struct ParentPool {
    weights: Vec<f64>,
}

impl ParentPool {
    pub fn new(parents: &[Chromosome]) -> Result<Self> {
        let finite = parents.iter().filter(|c| c.has_finite_fitness()).count();
        if finite < 2 {
            return Err(Error::DegeneratePool { finite });
        }
        let fitness: Vec<f64> = parents.iter().map(Chromosome::score).collect();
        Ok(ParentPool {
            weights: softmax_weights(&fitness),
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.weights
    }

    fn draw_excluding<R: Rng + ?Sized>(&self, rng: &mut R, excluded: Option<usize>) -> usize {
        let mass: f64 = self
            .weights
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != excluded)
            .map(|(_, w)| w)
            .sum();
        let target = rng.random::<f64>() * mass;
        let mut acc = 0.0;
        let mut last = None;
        for (i, &w) in self.weights.iter().enumerate() {
            if Some(i) == excluded || w == 0.0 {
                continue;
            }
            acc += w;
            last = Some(i);
            if target < acc {
                return i;
            }
        }
        // rounding left target at the very top of the cumulative sum
        last.expect("pool holds at least two positive weights")
    }

    /// Mother from the full softmax, father from the softmax conditioned on
    /// not being the mother.
    pub fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let mother = self.draw_excluding(rng, None);
        let father = self.draw_excluding(rng, Some(mother));
        (mother, father)
    }
}

/// One mother/father draw from `parents`.
pub fn pair<R: Rng + ?Sized>(parents: &[Chromosome], rng: &mut R) -> Result<(usize, usize)> {
    Ok(ParentPool::new(parents)?.draw_pair(rng))
}

pub fn crossover<R: Rng + ?Sized>(
    mother: &Chromosome,
    father: &Chromosome,
    rng: &mut R,
) -> Chromosome {
    let mut genes = mother.genes;
    for (g, &f) in genes.iter_mut().zip(father.genes.iter()) {
        if rng.random_bool(0.5) {
            let gamma: f64 = rng.sample(Open01);
            *g = gamma * *g + (1.0 - gamma) * f;
        }
    }
    Chromosome::new(genes)
}

/// Gaussian perturbation of every gene outside `elite_index`, each with
/// probability `mutation_rate`. Mutated chromosomes lose their fitness.
pub fn mutate<R: Rng + ?Sized>(
    population: &mut [Chromosome],
    elite_index: usize,
    config: &CgaConfig,
    rng: &mut R,
) {
    let noise = Normal::new(0.0, config.mutation_sigma)
        .expect("sigma validated as finite and non-negative");
    for (i, c) in population.iter_mut().enumerate() {
        if i == elite_index {
            continue;
        }
        let mut changed = false;
        for g in c.genes.iter_mut() {
            if rng.random::<f64>() < config.mutation_rate {
                *g = (*g + noise.sample(rng)).clamp(-1.0, 1.0);
                changed = true;
            }
        }
        if changed {
            c.fitness = None;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_genes: [f64; GENES],
    /// Physical split of the best chromosome, when the objective is a budget
    /// and the best chromosome is feasible.
    pub best_budget: Option<EpsilonBudget>,
    pub best_fitness: f64,
    /// Best fitness of generation 0 (the initial population) through
    /// generation `N_iter`.
    pub fitness_history: Vec<f64>,
    pub evaluations: usize,
    /// Generations whose parent pool had fewer than two finite-fitness members
    /// and were re-seeded uniformly.
    pub reseeds: usize,
}

/// Maximizes the key rate over the split of `total` between `ε_PE` and
/// `ε_cor`, with `ε_sec` taking the rest.
pub fn run<F>(
    config: &CgaConfig,
    total: f64,
    family: Family,
    rate_fn: F,
) -> Result<OptimizationResult>
where
    F: Fn(&EpsilonBudget) -> Result<f64> + Sync,
{
    let objective = BudgetObjective::new(total, family, rate_fn)?;
    let mut result = run_with(config, &objective)?;
    result.best_budget = objective.budget(result.best_genes);
    Ok(result)
}

/// The generation loop on an arbitrary objective.
pub fn run_with<O: Objective + ?Sized>(
    config: &CgaConfig,
    objective: &O,
) -> Result<OptimizationResult> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population = initialize(config, &mut rng);
    let mut history = Vec::with_capacity(config.iterations + 1);
    let mut evaluations = 0;
    let mut reseeds = 0;
    let n_offspring = config.population - config.n_survivors();

    for generation in 0..=config.iterations {
        evaluations += evaluate(&mut population, objective);
        sort_by_fitness(&mut population);
        history.push(population[0].score());
        if generation == config.iterations {
            break;
        }

        let Selection {
            parents,
            n_survivors,
        } = select(&population, config);
        let pool = match ParentPool::new(&parents) {
            Ok(pool) => pool,
            Err(_) => {
                reseeds += 1;
                log::debug!("generation {generation}: parent pool degenerate, re-seeding");
                let elite = population[0];
                population = initialize(config, &mut rng);
                population[0] = elite;
                continue;
            }
        };

        let pairs: Vec<(usize, usize)> =
            (0..n_offspring).map(|_| pool.draw_pair(&mut rng)).collect();
        let offspring: Vec<Chromosome> = pairs
            .iter()
            .map(|&(m, f)| crossover(&parents[m], &parents[f], &mut rng))
            .collect();

        let mut next = parents;
        next.truncate(n_survivors);
        next.extend(offspring);
        mutate(&mut next, 0, config, &mut rng);
        population = next;
    }

    let best = population[0];
    Ok(OptimizationResult {
        best_genes: best.genes,
        best_budget: None,
        best_fitness: best.score(),
        fitness_history: history,
        evaluations,
        reseeds,
    })
}
