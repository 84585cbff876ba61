use nbiot_core::coding::{qpp::supported_block_sizes, RateMatcher, TurboCodec};
use nbiot_core::config::KeyValues;
use nbiot_core::harness::{read_csv, run_campaign, trial_stream, write_csv, CampaignConfig, ChannelKind, ChannelModel, StatsRow};
use nbiot_core::threshold::{Threshold, ThresholdTable};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ChannelKind> {
    prop_oneof![Just(ChannelKind::Nprach), Just(ChannelKind::F1), Just(ChannelKind::F2)]
}

fn model() -> impl Strategy<Value = ChannelModel> {
    prop_oneof![
        Just(ChannelModel::Awgn),
        Just(ChannelModel::Epa1),
        Just(ChannelModel::Epa5),
        Just(ChannelModel::Etu1)
    ]
}

fn field() -> impl Strategy<Value = Option<f64>> {
    proptest::option::of(-1e6..1e6f64)
}

fn row() -> impl Strategy<Value = StatsRow> {
    (
        (kind(), model(), -30.0..30.0f64, 1usize..=128, 1usize..=12, 1usize..100_000),
        (field(), field(), field(), field(), field(), field(), field()),
    )
        .prop_map(|((channel, model, snr_db, reps, tones, trials), (d, f, a, t, c, th, w))| StatsRow {
            channel,
            model,
            snr_db,
            reps,
            tones,
            trials,
            detect_or_pass: d,
            false_alarm: f,
            ack_miss: a,
            timing_err_us: t,
            cfo_err_hz: c,
            throughput_frac: th,
            wall_s: w,
        })
}

proptest! {
    #[test]
    fn csv_round_trips(rows in proptest::collection::vec(row(), 0..8)) {
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn threshold_table_round_trips(
        entries in proptest::collection::vec((1usize..=128, 1usize..=4, 1e-9..1e3f64, 1usize..1_000_000, any::<u64>()), 0..6)
    ) {
        let mut table = ThresholdTable::default();
        for (reps, n_rx, epsilon, trials, seed) in entries {
            table.insert(Threshold { reps, n_rx, epsilon, trials, seed });
        }
        prop_assert_eq!(ThresholdTable::parse(&table.to_text()).unwrap(), table);
    }

    #[test]
    fn trial_streams_are_distinct(p in 0usize..64, t in 0usize..1 << 30, q in 0usize..64, u in 0usize..1 << 30, a: bool, b: bool) {
        prop_assume!((p, t, a) != (q, u, b));
        prop_assert_ne!(trial_stream(p, t, a), trial_stream(q, u, b));
    }

    #[test]
    fn coded_chain_recovers_bits(ki in 0usize..20, seed: u64, rv in prop_oneof![Just(0usize), Just(2)]) {
        let k = supported_block_sizes().nth(ki).unwrap();
        let bits: Vec<u8> = (0..k).map(|i| ((seed >> (i % 64)) & 1) as u8 ^ (i % 3 == 0) as u8).collect();
        let codec = TurboCodec::new(k).unwrap();
        let rm = RateMatcher::new(codec.stream_len(), 2 * codec.stream_len(), rv).unwrap();
        let tx = rm.rate_match(&codec.encode(&bits).unwrap()).unwrap();
        let llr: Vec<f64> = tx.iter().map(|&b| if b == 0 { 2.0 } else { -2.0 }).collect();
        let out = codec.decode(&rm.rate_dematch(&llr).unwrap(), false).unwrap();
        prop_assert_eq!(out.bits, bits);
    }
}

fn campaign(kind: ChannelKind, text: &str) -> Vec<StatsRow> {
    let kv = KeyValues::parse(text).unwrap();
    run_campaign(&CampaignConfig::from_kv(&kv, Some(kind)).unwrap()).unwrap()
}

#[test]
fn campaigns_repeat_under_equal_seeds() {
    let f2 = "repetitions = 1\nmodel = epa5\nsnr_db = 0\ntrials = 200\ncalibration_trials = 1000";
    let a = campaign(ChannelKind::F2, &format!("{f2}\nseed = 3"));
    assert_eq!(a, campaign(ChannelKind::F2, &format!("{f2}\nseed = 3")));
    assert_ne!(a, campaign(ChannelKind::F2, &format!("{f2}\nseed = 4")));

    let f1 = "tones = 1\nmodel = etu1\nsnr_db = -6,-2\ntrials = 40";
    let a = campaign(ChannelKind::F1, &format!("{f1}\nseed = 3"));
    assert_eq!(a, campaign(ChannelKind::F1, &format!("{f1}\nseed = 3")));
    assert!(a[0].throughput_frac <= a[1].throughput_frac);
}

#[test]
fn rows_describe_the_campaign() {
    let r = campaign(ChannelKind::F1, "tones = 6\nmodulation = qpsk\ntbs_bits = 88\nrepetitions = 4\nsnr_db = 10\ntrials = 5");
    assert_eq!(r.len(), 1);
    let r = &r[0];
    assert_eq!((r.channel, r.reps, r.tones, r.trials), (ChannelKind::F1, 4, 6, 5));
    assert_eq!(r.throughput_frac, Some(1.0));
    assert!(r.ack_miss.is_none() && r.timing_err_us.is_none() && r.wall_s.is_none());
}
