use super::hdbscan::{hdbscan, NOISE};
use super::reduce::{reduce_dimensions, ReduceParams};
use super::{TopicError, TopicModelParams};

/// Cluster assignment for each document, `-1` for outliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawClusters {
    pub labels: Vec<i32>,
    pub n_topics: usize,
}

impl RawClusters {
    fn from_labels(labels: Vec<i32>) -> Self {
        let n_topics = labels.iter().filter(|&&l| l != NOISE).map(|&l| l as usize + 1).max().unwrap_or(0);
        Self { labels, n_topics }
    }

    /// Member indices per topic, in document order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_topics];
        for (i, &l) in self.labels.iter().enumerate() {
            if l != NOISE {
                out[l as usize].push(i);
            }
        }
        out
    }

    pub fn outliers(&self) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == NOISE).map(|(i, _)| i).collect()
    }
}

fn check_size(n: usize, min_topic_size: usize) -> Result<(), TopicError> {
    if n < 2 * min_topic_size {
        return Err(TopicError::TooFewDocuments { n, needed: 2 * min_topic_size });
    }
    Ok(())
}

fn degenerate(embeddings: &[Vec<f64>]) -> bool {
    embeddings.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| (a - b).abs() <= 1e-12))
}

/// Low-dimensional projection reused by every clustering attempt.
pub struct Projection {
    points: Vec<Vec<f64>>,
    degenerate: bool,
}

impl Projection {
    pub fn new(embeddings: &[Vec<f64>], seed: u64) -> Self {
        if degenerate(embeddings) {
            return Self { points: embeddings.to_vec(), degenerate: true };
        }
        let params = ReduceParams { seed, ..ReduceParams::default() };
        Self { points: reduce_dimensions(embeddings, &params), degenerate: false }
    }

    pub fn cluster(&self, min_topic_size: usize) -> RawClusters {
        if self.degenerate {
            log::warn!("all {} embeddings are identical; returning a single cluster", self.points.len());
            return RawClusters::from_labels(vec![0; self.points.len()]);
        }
        RawClusters::from_labels(hdbscan(&self.points, min_topic_size, min_topic_size))
    }
}

/// Reduces the embeddings to 5 dimensions and clusters them with minimum
/// cluster size `params.min_topic_size`. Deterministic for a fixed seed.
pub fn cluster_documents(embeddings: &[Vec<f64>], params: &TopicModelParams, seed: u64) -> Result<RawClusters, TopicError> {
    params.validate()?;
    check_size(embeddings.len(), params.min_topic_size)?;
    Ok(Projection::new(embeddings, seed).cluster(params.min_topic_size))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub clusters: RawClusters,
    pub params: TopicModelParams,
    pub iterations: usize,
}

fn grow(m: usize) -> usize {
    // round(m * 1.5), halves up
    (3 * m + 1) / 2
}

fn shrink(m: usize) -> usize {
    // round(m / 1.5), halves up
    (4 * m + 3) / 6
}

/// Re-clusters with a larger `min_topic_size` while there are too many topics
/// and a smaller one while there are too few, until the count lands in
/// `[target_topic_min, target_topic_max]` or the iteration budget runs out.
///
/// Steps are geometric (x1.5 or /1.5) until the parameter has been seen on
/// both sides of the band, then bisect between the two. On exhaustion the
/// attempt closest to the band wins, preferring at least two topics and then
/// fewer topics.
pub fn tune_topic_count(embeddings: &[Vec<f64>], params: &TopicModelParams, seed: u64) -> Result<TuneOutcome, TopicError> {
    params.validate()?;
    let n = embeddings.len();
    check_size(n, params.min_topic_size)?;
    let projection = Projection::new(embeddings, seed);
    let (lo, hi) = (params.target_topic_min, params.target_topic_max);
    let max_m = (n / 2).max(2);
    let distance = |c: usize| if c < lo { lo - c } else { c.saturating_sub(hi) };

    let mut m = params.min_topic_size;
    let mut too_many_at: Option<usize> = None;
    let mut too_few_at: Option<usize> = None;
    let mut best: Option<(usize, RawClusters, usize)> = None;
    let mut tried = std::collections::BTreeSet::new();
    for iteration in 1..=params.max_tuning_iterations {
        let clusters = projection.cluster(m);
        let count = clusters.n_topics;
        log::info!("tuning iteration {iteration}: min_topic_size={m} -> {count} topics");
        tried.insert(m);
        let better = match &best {
            None => true,
            Some((_, b, _)) => {
                let key = |c: usize| (c < 2, distance(c), c);
                key(count) < key(b.n_topics)
            }
        };
        if better {
            best = Some((m, clusters.clone(), iteration));
        }
        if (lo..=hi).contains(&count) {
            return Ok(TuneOutcome { clusters, params: TopicModelParams { min_topic_size: m, ..params.clone() }, iterations: iteration });
        }
        let next = if count > hi {
            too_many_at = Some(too_many_at.map_or(m, |t| t.max(m)));
            match too_few_at {
                Some(f) => (m + f) / 2,
                None => grow(m),
            }
        } else {
            too_few_at = Some(too_few_at.map_or(m, |t| t.min(m)));
            match too_many_at {
                Some(t) => (t + m + 1) / 2,
                None => shrink(m),
            }
        }
        .clamp(2, max_m);
        if iteration == params.max_tuning_iterations || tried.contains(&next) {
            let (best_m, clusters, _) = best.expect("at least one attempt");
            if clusters.n_topics < 2 {
                return Err(TopicError::TuningFailed { best_count: clusters.n_topics });
            }
            log::warn!(
                "topic count {} outside [{lo}, {hi}] after {iteration} iterations; keeping the closest attempt",
                clusters.n_topics
            );
            return Ok(TuneOutcome {
                clusters,
                params: TopicModelParams { min_topic_size: best_m, ..params.clone() },
                iterations: iteration,
            });
        }
        m = next;
    }
    unreachable!("loop returns on its last iteration")
}
