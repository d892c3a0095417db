use pace_core::cluster::{BaseSpec, OracleClusterer};
use pace_core::gale::{run_gale, GaleConfig};
use pace_core::graph::{generate_sbm, planted_partition_params, SbmParams};
use pace_core::membership::{misclustered_node_fraction, misclustering_fraction_extended};
use pace_core::pace::{run_pace, PaceConfig, Recovery, TauMode};
use pace_core::sampling::{RootSelection, SamplerSpec};

fn planted(n: usize, k: usize, seed: u64) -> pace_core::LabeledGraph {
    let params = planted_partition_params(1.0, 0.25, 0.15, SbmParams::balanced(k)).unwrap();
    generate_sbm(&params, n, seed).unwrap()
}

#[test]
fn pace_recovers_dense_blocks_with_every_recovery_path() {
    let lg = planted(400, 3, 1);
    let truth = lg.membership();
    let base = BaseSpec::named("spectral_adj").build().unwrap();
    for recovery in [
        Recovery::SpectralOnChat,
        Recovery::ProjectionKmeans { s: 20 },
        Recovery::ProjectionDgcluster { s: 100 },
    ] {
        // Enough samples that every pair is observed.
        let mut config = PaceConfig::new(100, SamplerSpec::random_m(150).with_m_star(3));
        config.tau_mode = TauMode::Absolute(1.0);
        config.recovery = recovery;
        let res = run_pace(&lg.graph, 3, &config, base.as_ref(), 7).unwrap();
        let err = misclustered_node_fraction(&res.membership, &truth).unwrap();
        assert!(err <= 0.05, "{recovery:?}: {err}");
    }
}

#[test]
fn neighborhood_samplers_feed_pace() {
    let lg = planted(400, 2, 2);
    let truth = lg.membership();
    let base = BaseSpec::named("rsc").build().unwrap();
    for sampler in [
        SamplerSpec::h_hop(1).with_m_star(10),
        SamplerSpec::ego().with_roots(RootSelection::DegreeProportional).with_m_star(10),
        SamplerSpec::onion(1).with_roots(RootSelection::DegreeQuantileTruncated(0.5)).with_m_star(10),
    ] {
        let res = run_pace(&lg.graph, 2, &PaceConfig::new(60, sampler.clone()), base.as_ref(), 3).unwrap();
        let err = misclustered_node_fraction(&res.membership, &truth).unwrap();
        assert!(err <= 0.1, "{sampler:?}: {err}");
    }
}

#[test]
fn gale_matches_pace_on_dense_blocks() {
    let lg = planted(400, 4, 3);
    let truth = lg.membership();
    let base = BaseSpec::named("spectral_adj").build().unwrap();
    let res = run_gale(&lg.graph, 4, &GaleConfig::new(40, SamplerSpec::random_m(150).with_m_star(4)), base.as_ref(), 1)
        .unwrap();
    let err = misclustering_fraction_extended(&res.membership, &truth).unwrap() / 2.0;
    assert!(err <= 0.05, "{err}");
}

#[test]
fn noisy_oracle_error_shrinks_after_stitching() {
    let lg = planted(300, 3, 4);
    let truth = lg.membership();
    let base = OracleClusterer::noisy(lg.labels.clone(), 0.2);
    let res = run_pace(&lg.graph, 3, &PaceConfig::new(60, SamplerSpec::random_m(100).with_m_star(3)), &base, 2).unwrap();
    let err = misclustered_node_fraction(&res.membership, &truth).unwrap();
    assert!(err < 0.05, "{err}");
}
