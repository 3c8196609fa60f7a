//! Genetic search over complete weight assignments.
//!
//! Fitness of a chromosome is the network's RMS error over the dataset with
//! the decoded weights held fixed — no learning happens inside evaluation.
//! Lower fitness is better, and the search minimizes it with tournament
//! selection, k-point crossover, per-gene Gaussian mutation and elitism.
//!
//! Determinism: one seeded generator drives every stochastic step, and its
//! draws occur in a fixed order — population initialization, then per child
//! the two tournament selections, the crossover cut points, and the mutation
//! draws. Fitness evaluations run in parallel but consume no randomness and
//! are assembled by chromosome index, so results are schedule-independent.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{
    decode_weights, instance_error, rms_error, Chromosome, GaConfig, LabeledDataset, MlpConfig,
    NetworkError,
};

/// Fixed-weight RMS fitness of one chromosome over the dataset.
pub fn fitgen(
    chromosome: &Chromosome,
    dataset: &LabeledDataset,
    config: &MlpConfig,
) -> Result<f64, NetworkError> {
    dataset.validate()?;
    let (in_dim, out_dim) = dataset.dims();
    if in_dim != config.input_dim || out_dim != config.output_dim {
        return Err(NetworkError::DimMismatch(format!(
            "dataset is {in_dim}→{out_dim}, network is {}→{}",
            config.input_dim, config.output_dim
        )));
    }
    let network = decode_weights(chromosome, config)?;
    let errors = dataset
        .inputs
        .iter()
        .zip(&dataset.targets)
        .map(|(x, t)| instance_error(t, &network.forward(x)?))
        .collect::<Result<Vec<_>, _>>()?;
    rms_error(&errors)
}

/// Evolves weight assignments for `ga_config.generations` generations,
/// stopping early once the best fitness reaches the tolerable RMS.
///
/// Returns the best chromosome ever seen (fitness filled in) and the
/// best-fitness history: one entry for the initial population and one per
/// completed generation. Elitism makes the history non-increasing.
pub fn ga_evolve(
    dataset: &LabeledDataset,
    mlp_config: &MlpConfig,
    ga_config: &GaConfig,
) -> Result<(Chromosome, Vec<f64>), NetworkError> {
    mlp_config.validate()?;
    ga_config.validate()?;
    dataset.validate()?;
    let gene_count = mlp_config.gene_count();
    if ga_config.crossover_points >= gene_count {
        return Err(NetworkError::ConfigError(format!(
            "crossover_points {} must be below the gene count {gene_count}",
            ga_config.crossover_points
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(ga_config.rng_seed);
    let mutation = Normal::new(0.0, ga_config.mutation_sigma)
        .map_err(|e| NetworkError::ConfigError(format!("mutation_sigma: {e}")))?;
    let p = ga_config.population_size;
    let r = ga_config.init_range;

    let mut population: Vec<Chromosome> = (0..p)
        .map(|_| Chromosome {
            genes: (0..gene_count).map(|_| rng.random_range(-r..=r)).collect(),
            fitness: None,
        })
        .collect();
    evaluate_missing(&mut population, dataset, mlp_config)?;

    let mut best = best_of(&population).clone();
    let mut history = vec![best.fitness.unwrap()];

    for _ in 0..ga_config.generations {
        if best.fitness.unwrap() <= mlp_config.tolerable_rms {
            break;
        }

        // Rank by fitness, ties by index, for the elite carry-over.
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| {
            population[a]
                .fitness
                .unwrap()
                .total_cmp(&population[b].fitness.unwrap())
                .then(a.cmp(&b))
        });

        let mut next: Vec<Chromosome> = order[..ga_config.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < p {
            let a = tournament(&population, ga_config.tournament_size, &mut rng);
            let b = tournament(&population, ga_config.tournament_size, &mut rng);
            let mut genes = crossover(
                &population[a].genes,
                &population[b].genes,
                ga_config.crossover_points,
                &mut rng,
            );
            for gene in &mut genes {
                if rng.random::<f64>() < ga_config.mutation_rate {
                    *gene += mutation.sample(&mut rng);
                }
            }
            next.push(Chromosome {
                genes,
                fitness: None,
            });
        }
        population = next;
        evaluate_missing(&mut population, dataset, mlp_config)?;

        let gen_best = best_of(&population);
        if gen_best.fitness.unwrap() < best.fitness.unwrap() {
            best = gen_best.clone();
        }
        history.push(best.fitness.unwrap());
    }

    Ok((best, history))
}

/// Fills in fitness for chromosomes that lack one. Evaluations run in
/// parallel and are written back by index.
fn evaluate_missing(
    population: &mut [Chromosome],
    dataset: &LabeledDataset,
    config: &MlpConfig,
) -> Result<(), NetworkError> {
    let missing: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness.is_none())
        .collect();
    let scores = missing
        .par_iter()
        .map(|&i| fitgen(&population[i], dataset, config))
        .collect::<Result<Vec<_>, _>>()?;
    for (&i, score) in missing.iter().zip(scores) {
        population[i].fitness = Some(score);
    }
    Ok(())
}

/// Index of the fittest chromosome, earliest on ties.
fn best_of(population: &[Chromosome]) -> &Chromosome {
    population
        .iter()
        .min_by(|a, b| a.fitness.unwrap().total_cmp(&b.fitness.unwrap()))
        .expect("population is never empty")
}

/// Tournament selection: draws `size` contestants with replacement and
/// returns the index of the fittest (the earliest drawn on ties).
fn tournament(population: &[Chromosome], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..population.len());
        if population[challenger].fitness.unwrap() < population[winner].fitness.unwrap() {
            winner = challenger;
        }
    }
    winner
}

/// k-point crossover: cuts both parents at the same `points` positions and
/// assembles the child from alternating segments, starting with `a`.
fn crossover(a: &[f64], b: &[f64], points: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut cuts: Vec<usize> = sample(rng, a.len() - 1, points)
        .iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut child = Vec::with_capacity(a.len());
    let mut from_a = true;
    let mut start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(a.len())) {
        child.extend_from_slice(if from_a {
            &a[start..cut]
        } else {
            &b[start..cut]
        });
        from_a = !from_a;
        start = cut;
    }
    child
}
