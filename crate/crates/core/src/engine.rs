//! The steady-state simulation loop.
//!
//! One birth is, in order: tournament selection, a Mom/Dad coin, single-point
//! crossover, decoding the child's mutation rate, per-bit flips, a possible
//! length change, target growth, fitness evaluation, and replacement of the
//! oldest least-fit individual when the child is strictly fitter. Every
//! `era_length` births the target drifts and the whole population is
//! re-scored.
//!
//! All randomness comes from one [`SimRng`] per run, consumed in this order
//! within a birth: `tournament_size` slot draws, the Mom/Dad coin, the
//! crossover point, the flip gaps (left to right), the length-event draw,
//! the add/remove coin, the appended bit, the target-growth bit, and at era
//! ends the target flip gaps.

use crate::bitgenome::{decode_mutation_rate, max_code_value, random_genome, Genome};
use crate::bits::BitString;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::{EraRecord, MetricsSample, RunResult};
use crate::rng::{flip_bits, RandomSource, SimRng};

const BIRTH_BITS: u32 = 40;
const MAX_KEYED_FITNESS: u64 = 1 << (64 - BIRTH_BITS);

#[inline]
fn rank_key(fitness: u32, birth_index: u64) -> u64 {
    assert!(
        u64::from(fitness) < MAX_KEYED_FITNESS,
        "fitness {fitness} exceeds key range"
    );
    debug_assert!(birth_index < 1 << BIRTH_BITS);
    (u64::from(fitness) << BIRTH_BITS) | birth_index
}

/// Exact integer sums over the population, kept current on every change.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Totals {
    fitness: u64,
    fitness_sq: u128,
    length: u64,
    length_sq: u128,
    code: u128,
    code_sq: u128,
    nonzero_codes: usize,
}

impl Totals {
    fn add_genome(&mut self, g: &Genome, code_length: usize) {
        let len = g.len() as u64;
        let code = u128::from(g.code_value(code_length));
        self.length += len;
        self.length_sq += u128::from(len) * u128::from(len);
        self.code += code;
        self.code_sq += code * code;
        self.nonzero_codes += usize::from(code != 0);
    }

    fn remove_genome(&mut self, g: &Genome, code_length: usize) {
        let len = g.len() as u64;
        let code = u128::from(g.code_value(code_length));
        self.length -= len;
        self.length_sq -= u128::from(len) * u128::from(len);
        self.code -= code;
        self.code_sq -= code * code;
        self.nonzero_codes -= usize::from(code != 0);
    }

    fn add_fitness(&mut self, f: u32) {
        self.fitness += u64::from(f);
        self.fitness_sq += u128::from(f) * u128::from(f);
    }

    fn remove_fitness(&mut self, f: u32) {
        self.fitness -= u64::from(f);
        self.fitness_sq -= u128::from(f) * u128::from(f);
    }
}

fn mean_sd(sum: u128, sum_sq: u128, n: usize, scale: f64) -> (f64, f64) {
    let n128 = n as u128;
    let mean = sum as f64 / n as f64 / scale;
    // n * sum_sq >= sum^2 by Cauchy-Schwarz, so this is exact and nonnegative.
    let var_num = n128 * sum_sq - sum * sum;
    let var = var_num as f64 / (n as f64 * n as f64);
    (mean, var.sqrt() / scale)
}

/// Population-wide means and standard deviations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationStats {
    pub mean_fitness: f64,
    pub mean_genome_length: f64,
    pub mean_mutation_rate: f64,
    pub sd_fitness: f64,
    pub sd_genome_length: f64,
    pub sd_mutation_rate: f64,
}

/// Fixed-size array of genomes with their cached fitness.
#[derive(Clone, Debug)]
pub struct Population {
    genomes: Vec<Genome>,
    fitness: Vec<u32>,
    keys: Vec<u64>,
    code_length: usize,
    totals: Totals,
}

impl Population {
    /// Wraps `genomes` with all fitness values 0.
    pub fn new(genomes: Vec<Genome>, code_length: usize) -> Self {
        assert!(!genomes.is_empty(), "population must not be empty");
        let mut totals = Totals::default();
        for g in &genomes {
            totals.add_genome(g, code_length);
        }
        let keys = genomes.iter().map(|g| rank_key(0, g.birth_index)).collect();
        let fitness = vec![0; genomes.len()];
        Population {
            genomes,
            fitness,
            keys,
            code_length,
            totals,
        }
    }

    /// Population whose cached fitness is set explicitly. Used by tests and
    /// the Python bindings to build specific situations.
    pub fn with_fitness(genomes: Vec<Genome>, fitness: Vec<u32>, code_length: usize) -> Self {
        assert_eq!(genomes.len(), fitness.len());
        let mut pop = Population::new(genomes, code_length);
        for (i, f) in fitness.into_iter().enumerate() {
            pop.set_fitness(i, f);
        }
        pop
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    pub fn code_length(&self) -> usize {
        self.code_length
    }

    #[inline]
    pub fn genome(&self, slot: usize) -> &Genome {
        &self.genomes[slot]
    }

    #[inline]
    pub fn fitness(&self, slot: usize) -> u32 {
        self.fitness[slot]
    }

    pub fn genomes(&self) -> &[Genome] {
        &self.genomes
    }

    pub fn fitnesses(&self) -> &[u32] {
        &self.fitness
    }

    /// Number of genomes whose mutation code is not all zeros.
    pub fn nonzero_codes(&self) -> usize {
        self.totals.nonzero_codes
    }

    pub fn min_fitness(&self) -> u32 {
        self.fitness.iter().copied().min().unwrap_or(0)
    }

    pub fn mean_fitness(&self) -> f64 {
        self.totals.fitness as f64 / self.len() as f64
    }

    /// Means and standard deviations from the running integer sums.
    pub fn stats(&self) -> PopulationStats {
        let n = self.len();
        let t = &self.totals;
        let (mean_fitness, sd_fitness) = mean_sd(u128::from(t.fitness), t.fitness_sq, n, 1.0);
        let (mean_genome_length, sd_genome_length) =
            mean_sd(u128::from(t.length), t.length_sq, n, 1.0);
        let (mean_mutation_rate, sd_mutation_rate) = mean_sd(
            t.code,
            t.code_sq,
            n,
            max_code_value(self.code_length) as f64,
        );
        PopulationStats {
            mean_fitness,
            mean_genome_length,
            mean_mutation_rate,
            sd_fitness,
            sd_genome_length,
            sd_mutation_rate,
        }
    }

    /// The oldest individual among the least fit: minimum fitness, then
    /// smallest birth index, then lowest slot.
    pub fn worst(&self) -> usize {
        let min = *self.keys.iter().min().expect("non-empty population");
        self.keys.iter().position(|&k| k == min).unwrap()
    }

    fn set_fitness(&mut self, slot: usize, f: u32) {
        self.totals.remove_fitness(self.fitness[slot]);
        self.totals.add_fitness(f);
        self.fitness[slot] = f;
        self.keys[slot] = rank_key(f, self.genomes[slot].birth_index);
    }

    fn replace(&mut self, slot: usize, genome: Genome, f: u32) {
        self.totals
            .remove_genome(&self.genomes[slot], self.code_length);
        self.totals.add_genome(&genome, self.code_length);
        self.genomes[slot] = genome;
        self.set_fitness(slot, f);
    }

    /// Re-scores every individual against `target`.
    pub fn reevaluate(&mut self, target: &Target) {
        self.totals.fitness = 0;
        self.totals.fitness_sq = 0;
        for slot in 0..self.genomes.len() {
            let f = evaluate_fitness(&self.genomes[slot], target, self.code_length);
            self.fitness[slot] = f;
            self.keys[slot] = rank_key(f, self.genomes[slot].birth_index);
            self.totals.add_fitness(f);
        }
    }
}

/// The goal string phenotypes are scored against. Never shrinks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Target(pub BitString);

impl Target {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }
}

/// Picks two parent slots by tournament, returning `(mom, dad)`.
///
/// Draws `tournament_size` slots uniformly with replacement, takes the two
/// fittest distinct slots in the sample (see [`top_two`]), then one coin
/// decides which of them is Mom.
pub fn tournament_select<R: RandomSource + ?Sized>(
    pop: &Population,
    tournament_size: usize,
    rng: &mut R,
) -> (usize, usize) {
    assert!(tournament_size >= 2);
    let n = pop.len();
    let fitness = pop.fitnesses();
    let mut picker = TopTwo::default();
    for _ in 0..tournament_size {
        let slot = rng.below(n);
        picker.offer(slot, fitness[slot]);
    }
    let (a, b) = picker.finish();
    if rng.coin() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Fittest and second-fittest distinct slots of a tournament sample.
///
/// Ties go to the slot seen first in the sample. When the sample holds a
/// single distinct slot, that slot is returned twice (self-mating).
pub fn top_two<I: IntoIterator<Item = usize>>(sample: I, fitness: &[u32]) -> (usize, usize) {
    let mut picker = TopTwo::default();
    for slot in sample {
        picker.offer(slot, fitness[slot]);
    }
    picker.finish()
}

#[derive(Default)]
struct TopTwo {
    best: Option<(u32, usize)>,
    second: Option<(u32, usize)>,
}

impl TopTwo {
    #[inline]
    fn offer(&mut self, slot: usize, f: u32) {
        match self.best {
            None => self.best = Some((f, slot)),
            Some((_, b)) if b == slot => {}
            Some((bf, _)) if f > bf => {
                self.second = self.best;
                self.best = Some((f, slot));
            }
            Some(_) => match self.second {
                Some((_, s)) if s == slot => {}
                Some((sf, _)) if f <= sf => {}
                _ => self.second = Some((f, slot)),
            },
        }
    }

    fn finish(self) -> (usize, usize) {
        let (_, best) = self.best.expect("empty tournament sample");
        let second = self.second.map_or(best, |(_, s)| s);
        (best, second)
    }
}

/// Child of `mom[..cross] ++ dad[cross..]` with `cross` uniform in
/// `1..min_len`; the child has Dad's length.
pub fn crossover<R: RandomSource + ?Sized>(
    mom: &Genome,
    dad: &Genome,
    birth_index: u64,
    rng: &mut R,
) -> Genome {
    let min_len = mom.len().min(dad.len());
    assert!(min_len >= 2, "crossover needs parents of length >= 2");
    let cross = 1 + rng.below(min_len - 1);
    crossover_at(mom, dad, cross, birth_index)
}

/// Crossover at a fixed point: Mom supplies the first `cross` bits.
pub fn crossover_at(mom: &Genome, dad: &Genome, cross: usize, birth_index: u64) -> Genome {
    Genome::new(BitString::splice(&mom.code, &dad.code, cross), birth_index)
}

/// What [`mutate`] did to a child.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mutation {
    /// Rate decoded before any flips.
    pub rate: f64,
    pub flipped: usize,
    /// -1, 0, or +1.
    pub length_delta: i8,
}

/// Flips every bit (mutation code included) with the child's own decoded
/// rate, then with the same probability adds or removes one trailing bit.
/// Removal is suppressed at the minimum length `code_length`.
pub fn mutate<R: RandomSource + ?Sized>(
    child: &mut Genome,
    code_length: usize,
    rng: &mut R,
) -> Mutation {
    let rate = decode_mutation_rate(child, code_length);
    let flipped = flip_bits(&mut child.code, 0, rate, rng);
    let mut length_delta = 0;
    if rng.bernoulli(rate) {
        if rng.coin() {
            child.code.push(rng.coin());
            length_delta = 1;
        } else if child.len() > code_length {
            child.code.pop();
            length_delta = -1;
        }
    }
    Mutation {
        rate,
        flipped,
        length_delta,
    }
}

/// Appends one random bit to the target when the child's phenotype is
/// longer than it. Returns whether the target grew.
pub fn grow_target<R: RandomSource + ?Sized>(
    target: &mut Target,
    child: &Genome,
    code_length: usize,
    rng: &mut R,
) -> bool {
    if child.len() - code_length > target.len() {
        target.0.push(rng.coin());
        true
    } else {
        false
    }
}

/// Positional matches between the phenotype and the target over their
/// common prefix. A null phenotype scores 0.
#[inline]
pub fn evaluate_fitness(g: &Genome, target: &Target, code_length: usize) -> u32 {
    g.code.count_matches(code_length, &target.0) as u32
}

/// Replaces the worst slot with `child` iff `child_fit` is strictly greater
/// than its fitness. Returns the replaced slot.
pub fn replace_worst(pop: &mut Population, child: Genome, child_fit: u32) -> Option<usize> {
    let worst = pop.worst();
    if child_fit > pop.fitness(worst) {
        pop.replace(worst, child, child_fit);
        Some(worst)
    } else {
        None
    }
}

/// Flips each target bit with probability `rate` and re-scores everyone.
/// Returns the number of target bits flipped.
pub fn era_transition<R: RandomSource + ?Sized>(
    target: &mut Target,
    rate: f64,
    pop: &mut Population,
    rng: &mut R,
) -> usize {
    let flipped = flip_bits(&mut target.0, 0, rate, rng);
    pop.reevaluate(target);
    flipped
}

/// Summary of a single birth.
#[derive(Clone, Debug, PartialEq)]
pub struct BirthOutcome {
    pub child_num: u64,
    pub mom: usize,
    pub dad: usize,
    pub mutation: Mutation,
    pub child_length: usize,
    pub child_fitness: u32,
    pub replaced: Option<usize>,
    pub target_grew: bool,
    /// Set when this birth closed an era.
    pub era: Option<EraRecord>,
}

/// Complete state of one run.
#[derive(Clone, Debug)]
pub struct SimState {
    config: SimConfig,
    population: Population,
    target: Target,
    children_born: u64,
    rng: SimRng,
    last_novel_birth: Option<u64>,
    era_start_fitness: f64,
    eras_completed: u64,
}

impl SimState {
    /// Fresh state: `pop_size` random genomes of exactly
    /// `mutation_code_length` bits, empty target, all fitness 0.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = SimRng::seed_from_u64(config.seed);
        let genomes = (0..config.pop_size)
            .map(|_| random_genome(config.mutation_code_length, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let population = Population::new(genomes, config.mutation_code_length);
        let last_novel_birth = (population.nonzero_codes() == 0).then_some(0);
        Ok(SimState {
            config,
            population,
            target: Target::default(),
            children_born: 0,
            rng,
            last_novel_birth,
            era_start_fitness: 0.0,
            eras_completed: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn children_born(&self) -> u64 {
        self.children_born
    }

    /// Birth at which every genome first encoded a zero mutation rate.
    pub fn last_novel_birth(&self) -> Option<u64> {
        self.last_novel_birth
    }

    /// Mean fitness right after the most recent target change (or at start).
    pub fn era_start_fitness(&self) -> f64 {
        self.era_start_fitness
    }

    pub fn is_finished(&self) -> bool {
        self.children_born >= self.config.run_length
            || (self.config.stop_on_zero_mutation && self.last_novel_birth.is_some())
    }

    pub fn rng(&self) -> &SimRng {
        &self.rng
    }

    /// One birth, plus the era transition when this birth closes an era.
    pub fn step(&mut self) -> Result<BirthOutcome> {
        if self.children_born >= self.config.run_length {
            return Err(Error::InvalidState(format!(
                "run already finished after {} children",
                self.children_born
            )));
        }
        let code_length = self.config.mutation_code_length;
        let child_num = self.children_born + 1;

        let (mom, dad) =
            tournament_select(&self.population, self.config.tournament_size, &mut self.rng);
        let mut child = crossover(
            self.population.genome(mom),
            self.population.genome(dad),
            child_num,
            &mut self.rng,
        );
        let mutation = mutate(&mut child, code_length, &mut self.rng);
        let target_grew = grow_target(&mut self.target, &child, code_length, &mut self.rng);
        let child_fitness = evaluate_fitness(&child, &self.target, code_length);
        let child_length = child.len();
        let replaced = replace_worst(&mut self.population, child, child_fitness);
        self.children_born = child_num;

        if replaced.is_some()
            && self.last_novel_birth.is_none()
            && self.population.nonzero_codes() == 0
        {
            self.last_novel_birth = Some(child_num);
        }

        let era = if child_num.is_multiple_of(self.config.era_length) {
            let fitness_at_end = self.population.mean_fitness();
            era_transition(
                &mut self.target,
                self.config.target_change_rate,
                &mut self.population,
                &mut self.rng,
            );
            self.eras_completed += 1;
            let record = EraRecord {
                era_index: self.eras_completed,
                fitness_at_start: self.era_start_fitness,
                fitness_at_end,
            };
            self.era_start_fitness = self.population.mean_fitness();
            Some(record)
        } else {
            None
        };

        Ok(BirthOutcome {
            child_num,
            mom,
            dad,
            mutation,
            child_length,
            child_fitness,
            replaced,
            target_grew,
            era,
        })
    }
}

/// Callbacks fired during [`run_observed`].
pub trait Observer {
    fn on_sample(&mut self, _state: &SimState, _sample: &MetricsSample) {}
    fn on_era(&mut self, _state: &SimState, _record: &EraRecord) {}
}

impl Observer for () {}

/// Runs a full simulation and collects its metrics.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    run_observed(config, &mut ())
}

/// Runs to `run_length` births (or to the first all-zero mutation rate
/// when `stop_on_zero_mutation` is set), sampling at birth 0, every
/// `sample_interval` births, and at the final birth.
///
/// The `mean_fitness_increase` of a sample is the increase since the last
/// target change when samples are finer than eras; otherwise it is the
/// mean era increase over eras that ended inside the sample window.
pub fn run_observed(config: &SimConfig, observer: &mut dyn Observer) -> Result<RunResult> {
    let mut state = SimState::new(config.clone())?;
    let per_birth_increase = config.sample_interval < config.era_length;
    let mut samples = Vec::new();
    let mut era_records = Vec::new();
    let mut window_increase = (0.0f64, 0usize);

    let take_sample = |state: &SimState,
                       window: &mut (f64, usize),
                       samples: &mut Vec<MetricsSample>,
                       observer: &mut dyn Observer| {
        let stats = state.population.stats();
        let increase = if per_birth_increase {
            Some(stats.mean_fitness - state.era_start_fitness)
        } else if window.1 > 0 {
            Some(window.0 / window.1 as f64)
        } else {
            None
        };
        *window = (0.0, 0);
        let sample = MetricsSample::from_stats(state.children_born, &stats, increase);
        observer.on_sample(state, &sample);
        samples.push(sample);
    };

    take_sample(&state, &mut window_increase, &mut samples, observer);
    while !state.is_finished() {
        let outcome = state.step()?;
        if let Some(record) = outcome.era {
            window_increase.0 += record.increase();
            window_increase.1 += 1;
            observer.on_era(&state, &record);
            era_records.push(record);
        }
        let born = state.children_born;
        if born % config.sample_interval == 0 || state.is_finished() {
            take_sample(&state, &mut window_increase, &mut samples, observer);
        }
    }

    let last = samples.last().expect("at least the initial sample");
    Ok(RunResult {
        seed: config.seed,
        run_length: config.run_length,
        sample_interval: config.sample_interval,
        births: state.children_born,
        final_fitness: last.mean_fitness,
        final_genome_length: last.mean_genome_length,
        final_mutation_rate: last.mean_mutation_rate,
        last_novel_birth: state.last_novel_birth,
        samples,
        era_records,
    })
}
