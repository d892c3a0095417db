use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::cluster::{BaseSpec, OracleClusterer};
use crate::graph::{generate_sbm, induced_subgraph, planted_partition_params, SbmParams, SubgraphSample};
use crate::membership::{clustering_matrix, misclustering_fraction, tilde_delta};
use pace_testkit::SplitMix;

fn full_sample(graph: &Graph) -> SubgraphSample {
    induced_subgraph(graph, &(0..graph.n()).collect::<Vec<_>>()).unwrap()
}

fn labels_of(k: usize, labels: &[usize]) -> MembershipMatrix {
    MembershipMatrix::from_labels(k, labels).unwrap()
}

fn block_labels(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| i * k / n).collect()
}

fn sbm(n: usize, k: usize, seed: u64) -> crate::graph::LabeledGraph {
    let params = planted_partition_params(1.0, 0.3, 0.2, SbmParams::balanced(k)).unwrap();
    generate_sbm(&params, n, seed).unwrap()
}

#[test]
fn full_graph_uniform_votes_equal_clustering_matrix() {
    let g = Graph::from_edges(5, [(0, 1), (2, 3)]).unwrap();
    let z = labels_of(2, &[0, 0, 1, 1, 0]);
    let mut acc = ClusteringMatrixAccumulator::new(5);
    acc.accumulate(&full_sample(&g), &z, WeightScheme::Uniform).unwrap();
    let c = clustering_matrix(&z).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(acc.sum(i, j) as f64, c.get(i, j));
            assert_eq!(acc.count(i, j), 1);
        }
    }
    acc.accumulate(&full_sample(&g), &z, WeightScheme::Uniform).unwrap();
    assert_eq!(acc.sum(0, 1), 2);
    assert_eq!(acc.count(3, 4), 2);
}

#[test]
fn subgraph_size_weights_reproduce_the_full_graph_estimate() {
    let lg = sbm(30, 3, 1);
    let z = labels_of(3, &lg.labels);
    let mut acc = ClusteringMatrixAccumulator::new(30);
    acc.accumulate(&full_sample(&lg.graph), &z, WeightScheme::SubgraphSize).unwrap();
    let c = clustering_matrix(&z).unwrap();
    for tau in [1.0, 17.0, 30.0] {
        assert_eq!(acc.finalize(tau), c);
    }
    assert_eq!(acc.finalize(31.0), DenseMatrix::zeros(30, 30));
}

#[test]
fn finalize_thresholds() {
    let g = Graph::empty(4);
    let z = labels_of(2, &[0, 1, 0, 1]);
    let mut acc = ClusteringMatrixAccumulator::new(4);
    acc.accumulate(&full_sample(&g), &z, WeightScheme::Uniform).unwrap();
    assert_eq!(acc.finalize(1.0), clustering_matrix(&z).unwrap());
    assert_eq!(acc.finalize(2.0), DenseMatrix::zeros(4, 4));
}

#[test]
fn degree_pair_weights() {
    let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    let z = labels_of(1, &[0, 0, 0]);
    let mut acc = ClusteringMatrixAccumulator::new(3);
    acc.accumulate(&full_sample(&g), &z, WeightScheme::DegreePair).unwrap();
    assert_eq!(acc.count(0, 1), 3);
    assert_eq!(acc.count(0, 2), 2);
    assert_eq!(acc.count(1, 1), 4);
}

#[test]
fn fraction_tau_matches_the_random_subset_formula() {
    let lg = sbm(60, 2, 3);
    let (t, m, theta) = (25usize, 20usize, 0.5);
    let draws = draw_subgraphs(&lg.graph, &SamplerSpec::random_m(m), t, 7).unwrap();
    let z: Vec<MembershipMatrix> = draws.iter().map(|d| labels_of(1, &vec![0; d.sample.len()])).collect();
    let pairs: Vec<_> = draws.iter().zip(&z).map(|(d, z)| (&d.sample, z)).collect();
    let acc = ClusteringMatrixAccumulator::accumulate_all(60, &pairs, WeightScheme::Uniform).unwrap();
    let expected = (theta * t as f64 * (m * (m - 1)) as f64 / (60.0 * 59.0)).ceil();
    assert_eq!(resolve_tau(TauMode::Fraction(theta), &acc), expected);
}

#[test]
fn eta_threshold() {
    let c = clustering_matrix(&labels_of(2, &[0, 1, 1])).unwrap();
    assert_eq!(threshold_chat(&c, 0.5), c);
    let soft = DenseMatrix::from_vec(1, 3, vec![0.999, 1.0, 0.9995]).unwrap();
    assert_eq!(threshold_chat(&soft, 0.999).as_slice(), &[0.0, 1.0, 1.0]);
}

#[test]
fn projection_edge_cases() {
    let zero = DenseMatrix::zeros(6, 6);
    assert_eq!(project_rows(&zero, 3, 1).unwrap(), DenseMatrix::zeros(6, 3));
    let c = clustering_matrix(&labels_of(2, &[0, 1, 1, 0])).unwrap();
    let mut r = DenseMatrix::identity(4);
    r.as_mut_slice().iter_mut().for_each(|x| *x *= 2.0);
    assert_eq!(project_rows_with(&c, &r).unwrap(), c);
}

#[test]
fn projection_preserves_distances() {
    let n = 256;
    let s = (10.0 * (n as f64).ln()).ceil() as usize;
    let c = clustering_matrix(&labels_of(4, &block_labels(n, 4))).unwrap();
    let mut g = SplitMix(8);
    let mut good = 0;
    let mut total = 0;
    for seed in 0..10 {
        let p = project_rows(&c, s, seed).unwrap();
        for _ in 0..20 {
            let (i, j) = (g.below(n), g.below(n));
            let orig = crate::linalg::squared_distance(c.row(i), c.row(j)).sqrt();
            let proj = crate::linalg::squared_distance(p.row(i), p.row(j)).sqrt();
            total += 1;
            if orig == 0.0 {
                good += (proj == 0.0) as usize;
            } else if (0.5..=2.0).contains(&(proj / orig)) {
                good += 1;
            }
        }
    }
    assert!(good as f64 >= 0.95 * total as f64, "{good}/{total}");
}

#[test]
fn every_recovery_path_is_exact_on_a_clustering_matrix() {
    let truth = labels_of(3, &block_labels(90, 3));
    let c = clustering_matrix(&truth).unwrap();
    for recovery in [
        Recovery::SpectralOnChat,
        Recovery::ProjectionKmeans { s: 20 },
        Recovery::ProjectionDgcluster { s: 20 },
    ] {
        let z = recover_membership(&c, 3, recovery, 5, 4).unwrap();
        assert_eq!(misclustering_fraction(&z, &truth).unwrap(), 0.0, "{recovery:?}");
    }
}

#[test]
fn zero_chat_with_one_cluster() {
    let zero = DenseMatrix::zeros(7, 7);
    for recovery in [Recovery::SpectralOnChat, Recovery::ProjectionKmeans { s: 3 }, Recovery::ProjectionDgcluster { s: 3 }] {
        let z = recover_membership(&zero, 1, recovery, 2, 0).unwrap();
        assert!(z.labels().iter().all(|&l| l == Some(0)));
    }
}

#[test]
fn spectral_recovery_tolerates_noise() {
    let truth = labels_of(3, &block_labels(120, 3));
    let c = clustering_matrix(&truth).unwrap();
    for seed in 0..5 {
        let mut g = SplitMix(seed);
        let mut noisy = c.clone();
        for i in 0..120 {
            for j in 0..i {
                let e = 0.1 * g.unit() - 0.05;
                noisy.set(i, j, c.get(i, j) + e);
                noisy.set(j, i, c.get(i, j) + e);
            }
        }
        let z = recover_membership(&noisy, 3, Recovery::SpectralOnChat, 10, seed).unwrap();
        assert_eq!(misclustering_fraction(&z, &truth).unwrap(), 0.0);
    }
}

#[test]
fn naive_cluster_extremes() {
    let rows = DenseMatrix::from_fn(5, 2, |i, j| (i * 3 + j) as f64);
    let mut rng = rng::seeded(0);
    let singletons = naive_cluster(&rows, 0.0, &mut rng);
    let mut sorted = singletons.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    assert_eq!(naive_cluster(&rows, f64::INFINITY, &mut rng), vec![0; 5]);
}

#[test]
fn naive_cluster_separates_clustering_matrix_rows() {
    let (n, k) = (60, 3);
    let truth = labels_of(k, &block_labels(n, k));
    let c = clustering_matrix(&truth).unwrap();
    let gamma = 0.5 * (2.0 * n as f64 / k as f64).sqrt();
    let sigma = naive_cluster(&c, gamma, &mut rng::seeded(5));
    assert_eq!(*sigma.iter().max().unwrap(), k - 1);
    let z = labels_of(k, &sigma);
    assert_eq!(misclustering_fraction(&z, &truth).unwrap(), 0.0);
}

#[test]
fn dgcluster_on_exact_matrix() {
    let truth = labels_of(3, &block_labels(90, 3));
    let c = clustering_matrix(&truth).unwrap();
    let z = dgcluster(&c, &c, 3, 2).unwrap();
    assert_eq!(misclustering_fraction(&z, &truth).unwrap(), 0.0);
    let one = dgcluster(&c, &c, 1, 2).unwrap();
    assert!(one.labels().iter().all(|&l| l == Some(0)));
}

#[test]
fn dgcluster_merges_down_to_k() {
    // Four exact blocks requested as two: merging must pick blocks by mass.
    let truth = labels_of(4, &block_labels(40, 4));
    let mut c = clustering_matrix(&truth).unwrap();
    // Blocks 0 and 1 share some mass, as do 2 and 3.
    for i in 0..40 {
        for j in 0..40 {
            let (a, b) = (i / 10, j / 10);
            if a != b && a / 2 == b / 2 {
                c.set(i, j, 0.3);
            }
        }
    }
    let z = dgcluster(&c, &clustering_matrix(&truth).unwrap(), 2, 0).unwrap();
    let pairs = labels_of(2, &(0..40).map(|i| i / 20).collect::<Vec<_>>());
    assert_eq!(misclustering_fraction(&z, &pairs).unwrap(), 0.0);
}

#[test]
fn merge_examples() {
    assert_eq!(merge(&[0, 1, 2], 1, 2).unwrap(), vec![0, 1, 1]);
    assert_eq!(merge(&[0, 1, 2], 2, 1).unwrap(), merge(&[0, 1, 2], 1, 2).unwrap());
    assert_eq!(merge(&[0, 1, 2, 3, 1], 0, 1).unwrap(), vec![0, 0, 1, 2, 0]);
    assert!(merge(&[0, 1], 0, 2).is_err());
    assert!(merge(&[0, 1], 1, 1).is_err());
}

#[test]
fn single_full_graph_patch_reproduces_the_base_clusterer() {
    let lg = sbm(80, 2, 11);
    let base = BaseSpec::named("spectral_adj").build().unwrap();
    let mut config = PaceConfig::new(1, SamplerSpec::random_m(80).with_m_star(2));
    config.tau_mode = TauMode::Absolute(1.0);
    let seed = 5;
    let result = run_pace(&lg.graph, 2, &config, base.as_ref(), seed).unwrap();
    let direct = base.cluster(&lg.graph, 2, rng::derive(rng::derive(seed, 1), 0)).unwrap();
    assert_eq!(result.chat, clustering_matrix(&direct).unwrap());
    assert_eq!(result.membership.canonical(), direct.canonical());
    assert_eq!(result.coverage, 1.0);
}

#[test]
fn no_admissible_subgraph_is_an_error() {
    let lg = sbm(30, 2, 0);
    let base = BaseSpec::named("spectral_adj").build().unwrap();
    let config = PaceConfig::new(3, SamplerSpec::ego().with_m_star(31));
    assert_eq!(
        run_pace(&lg.graph, 2, &config, base.as_ref(), 0).unwrap_err(),
        Error::NoAdmissibleSubgraph { m_star: 31 }
    );
}

#[test]
fn config_validation() {
    let mut c = PaceConfig::new(10, SamplerSpec::random_m(5).with_m_star(1));
    assert!(c.validate(2).is_err());
    c.sampler.m_star = 2;
    assert!(c.validate(2).is_ok());
    c.tau_mode = TauMode::Fraction(1.0);
    assert!(c.validate(2).is_err());
    c.tau_mode = TauMode::Absolute(0.5);
    assert!(c.validate(2).is_err());
    c.tau_mode = TauMode::Absolute(2.0);
    c.eta = Some(1.0);
    assert!(c.validate(2).is_err());
}

#[test]
fn result_invariants_and_determinism() {
    let lg = sbm(120, 3, 2);
    let base = OracleClusterer::noisy(lg.labels.clone(), 0.1);
    let mut config = PaceConfig::new(30, SamplerSpec::random_m(40).with_m_star(3));
    config.tau_mode = TauMode::Absolute(2.0);
    let a = run_pace(&lg.graph, 3, &config, &base, 9).unwrap();
    let b = run_pace(&lg.graph, 3, &config, &base, 9).unwrap();
    assert_eq!(a.chat, b.chat);
    assert_eq!(a.membership, b.membership);
    assert!(a.chat.is_symmetric());
    assert!(a.chat.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
    assert!((0.0..=1.0).contains(&a.coverage));
    // Rebuild counts to check the zero pattern and the diagonal.
    let draws = draw_subgraphs(&lg.graph, &config.sampler, 30, rng::derive(9, 0)).unwrap();
    let ones: Vec<_> = draws.iter().map(|d| labels_of(1, &vec![0; d.sample.len()])).collect();
    let pairs: Vec<_> = draws.iter().zip(&ones).map(|(d, z)| (&d.sample, z)).collect();
    let counts = ClusteringMatrixAccumulator::accumulate_all(120, &pairs, WeightScheme::Uniform).unwrap();
    for i in 0..120 {
        for j in 0..120 {
            if (counts.count(i, j) as f64) < a.tau {
                assert_eq!(a.chat.get(i, j), 0.0);
            }
        }
        if counts.count(i, i) as f64 >= a.tau {
            assert_eq!(a.chat.get(i, i), 1.0);
        }
    }
}

#[test]
fn coverage_is_monotone_in_t() {
    let lg = sbm(50, 2, 4);
    let spec = SamplerSpec::random_m(12);
    let draws = draw_subgraphs(&lg.graph, &spec, 40, 3).unwrap();
    let ones: Vec<_> = draws.iter().map(|d| labels_of(1, &vec![0; d.sample.len()])).collect();
    let pairs: Vec<_> = draws.iter().zip(&ones).map(|(d, z)| (&d.sample, z)).collect();
    let small = ClusteringMatrixAccumulator::accumulate_all(50, &pairs[..15], WeightScheme::Uniform).unwrap();
    let large = ClusteringMatrixAccumulator::accumulate_all(50, &pairs, WeightScheme::Uniform).unwrap();
    for i in 0..50 {
        for j in 0..50 {
            assert!(large.count(i, j) >= small.count(i, j));
        }
    }
}

#[test]
fn estimate_improves_as_local_noise_drops() {
    let lg = sbm(150, 3, 6);
    let c_true = clustering_matrix(&lg.membership()).unwrap();
    let mut config = PaceConfig::new(40, SamplerSpec::random_m(50).with_m_star(3));
    config.tau_mode = TauMode::Absolute(2.0);
    let mut means = Vec::new();
    for flip in [0.4, 0.2, 0.05, 0.0] {
        let base = OracleClusterer::noisy(lg.labels.clone(), flip);
        let mean: f64 = (0..4)
            .map(|seed| tilde_delta(&run_pace(&lg.graph, 3, &config, &base, seed).unwrap().chat, &c_true).unwrap())
            .sum::<f64>()
            / 4.0;
        means.push(mean);
    }
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallel_accumulation_matches_sequential(seed in any::<u64>(), scheme in 0usize..3) {
        let scheme = [WeightScheme::Uniform, WeightScheme::SubgraphSize, WeightScheme::DegreePair][scheme];
        let lg = sbm(40, 2, seed);
        let draws = draw_subgraphs(&lg.graph, &SamplerSpec::h_hop(1), 12, seed).unwrap();
        let locals: Vec<_> = draws
            .iter()
            .map(|d| labels_of(2, &d.sample.nodes.iter().map(|&u| lg.labels[u]).collect::<Vec<_>>()))
            .collect();
        let pairs: Vec<_> = draws.iter().zip(&locals).map(|(d, z)| (&d.sample, z)).collect();
        let all = ClusteringMatrixAccumulator::accumulate_all(40, &pairs, scheme).unwrap();
        let mut seq = ClusteringMatrixAccumulator::new(40);
        for (s, z) in &pairs {
            seq.accumulate(s, z, scheme).unwrap();
        }
        prop_assert_eq!(&all, &seq);
        for i in 0..40 {
            for j in 0..40 {
                prop_assert!(all.sum(i, j) <= all.count(i, j));
                prop_assert_eq!(all.count(i, j), all.count(j, i));
            }
        }
    }
}
