use std::time::Instant;

use rayon::prelude::*;

use super::{CampaignConfig, ChannelKind, StatsRow, Waveform};
use crate::channel::{apply_channel, ChannelProfile, ImpairmentConfig};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, C64};
use crate::nprach_rx::{calibrate_threshold, NprachReceiver, Verdict};
use crate::npusch_f1_rx::F1Receiver;
use crate::npusch_f2_rx::{calibrate_dtx_threshold, F2Options, F2Receiver, F2Verdict};
use crate::numerology::{NprachConfig, NpuschF1Config, NpuschF2Config, SampleRate, NPRACH_SPACING_HZ, NPUSCH_SPACING_HZ};
use crate::rng::trial_rng;
use crate::threshold::{Threshold, ThresholdTable};
use crate::tx::{build_f1, build_f2, nprach_hop_sequence, nprach_waveform, DefaultPilots, TransportBlock};

/// Random stream of trial `t` at SNR point `point`; `dtx` selects the
/// interleaved noise-only trial. Streams below `2^40` are left to the
/// calibrators.
pub fn trial_stream(point: usize, t: usize, dtx: bool) -> u64 {
    ((point as u64 + 1) << 40) | ((t as u64) << 1) | dtx as u64
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<StatsRow>> {
    match &cfg.waveform {
        Waveform::Nprach(c) => run_nprach_campaign(cfg, c),
        Waveform::F1(c) => run_f1_campaign(cfg, c),
        Waveform::F2(c) => run_f2_campaign(cfg, c),
    }
}

fn row(cfg: &CampaignConfig, snr_db: f64) -> StatsRow {
    StatsRow {
        channel: cfg.waveform.kind(),
        model: cfg.model,
        snr_db,
        reps: cfg.waveform.repetitions(),
        tones: cfg.waveform.tones(),
        trials: cfg.trials,
        detect_or_pass: None,
        false_alarm: None,
        ack_miss: None,
        timing_err_us: None,
        cfo_err_hz: None,
        throughput_frac: None,
        wall_s: None,
    }
}

fn impairment(cfg: &CampaignConfig, snr_db: f64, spacing_hz: u32) -> ImpairmentConfig {
    let mut imp = ImpairmentConfig::new(snr_db, cfg.n_rx, spacing_hz as f64);
    imp.cfo_hz = cfg.cfo_hz;
    imp
}

/// Noise alone at the SNR definition of `imp`, over `len` samples.
fn dtx_wave(rate: SampleRate, len: usize, imp: &ImpairmentConfig, rng: &mut rand_chacha::ChaCha8Rng) -> Result<ComplexGrid> {
    let silent = ComplexGrid::single(rate, vec![C64::new(0.0, 0.0); len]);
    let quiet = ImpairmentConfig {
        cfo_hz: 0.0,
        timing_offset_samples: 0.0,
        ..*imp
    };
    apply_channel(&silent, &quiet, None, rng)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn table_threshold(cfg: &CampaignConfig, reps: usize) -> Result<Option<f64>> {
    match &cfg.thresholds {
        Some(path) => Ok(Some(ThresholdTable::load(path)?.get(reps, cfg.n_rx)?.epsilon)),
        None => Ok(None),
    }
}

struct NprachTrial {
    detected: bool,
    timing_err_us: f64,
    cfo_err_hz: f64,
    false_alarm: Option<bool>,
}

pub fn run_nprach_campaign(cfg: &CampaignConfig, c: &NprachConfig) -> Result<Vec<StatsRow>> {
    let rx = NprachReceiver::new(c.clone());
    let epsilon = match table_threshold(cfg, c.repetitions)? {
        Some(e) => e,
        None => calibrate_threshold(&rx, cfg.n_rx, cfg.calibration_trials, cfg.target_fa, cfg.seed)?.epsilon,
    };
    let hop = nprach_hop_sequence(c, cfg.rho, c.repetitions)?;
    let wave = nprach_waveform(&hop);
    let profile = cfg.model.profile();
    let tau_samples = cfg.timing_offset_us * 1e-6 * SampleRate::NPRACH.as_f64();
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let start = Instant::now();
            let mut imp = impairment(cfg, snr, NPRACH_SPACING_HZ);
            imp.timing_offset_samples = tau_samples;
            let trials: Vec<NprachTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, trial_stream(point, t, false));
                    let y = apply_channel(&wave, &imp, profile.as_ref(), &mut rng)?;
                    let rep = rx.detect(&y, cfg.rho, epsilon)?;
                    let false_alarm = if cfg.dtx_trials {
                        let mut rng = trial_rng(cfg.seed, trial_stream(point, t, true));
                        let n = dtx_wave(SampleRate::NPRACH, y.len(), &imp, &mut rng)?;
                        Some(rx.detect(&n, cfg.rho, epsilon)?.verdict == Verdict::Nprach)
                    } else {
                        None
                    };
                    Ok(NprachTrial {
                        detected: rep.verdict == Verdict::Nprach,
                        timing_err_us: (rep.rtd_us - cfg.timing_offset_us).abs(),
                        cfo_err_hz: (rep.cfo_hz - cfg.cfo_hz).abs(),
                        false_alarm,
                    })
                })
                .collect::<Result<_>>()?;
            let n = trials.len() as f64;
            let hits = || trials.iter().filter(|t| t.detected);
            let mut r = row(cfg, snr);
            r.detect_or_pass = Some(hits().count() as f64 / n);
            r.timing_err_us = mean(hits().map(|t| t.timing_err_us));
            r.cfo_err_hz = mean(hits().map(|t| t.cfo_err_hz));
            r.false_alarm = cfg
                .dtx_trials
                .then(|| trials.iter().filter(|t| t.false_alarm == Some(true)).count() as f64 / n);
            r.wall_s = cfg.report_wall.then(|| start.elapsed().as_secs_f64());
            Ok(r)
        })
        .collect()
}

struct F1Trial {
    delivered: bool,
    transmissions: usize,
    cfo_err_hz: f64,
}

/// Format 1 throughput as delivered transport blocks per transmission, with
/// up to `max_retx` retransmissions (alternating redundancy versions 2, 0)
/// combined in the HARQ buffer, each through a fresh channel realization.
pub fn run_f1_campaign(cfg: &CampaignConfig, c: &NpuschF1Config) -> Result<Vec<StatsRow>> {
    let rx = F1Receiver::new(c.clone())?;
    let pilots = DefaultPilots::default();
    let profile: Option<ChannelProfile> = cfg.model.profile();
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let start = Instant::now();
            let imp = impairment(cfg, snr, NPUSCH_SPACING_HZ);
            let trials: Vec<F1Trial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, trial_stream(point, t, false));
                    let tb = TransportBlock::random(&mut rng, c.tbs_bits);
                    let mut harq = rx.new_harq();
                    let mut cfo_err_hz = 0.0;
                    for attempt in 0..=cfg.max_retx {
                        let rv = 2 * (attempt % 2);
                        let wave = build_f1(&tb, c, rv, &pilots)?.grid;
                        let y = apply_channel(&wave, &imp, profile.as_ref(), &mut rng)?;
                        let res = rx.receive(&y, rv, &mut harq)?;
                        if attempt == 0 {
                            cfo_err_hz = mean(res.blocks.iter().map(|b| (b.cfo_hz - cfg.cfo_hz).abs())).unwrap_or(0.0);
                        }
                        if res.crc_pass && res.bits == tb.bits {
                            return Ok(F1Trial {
                                delivered: true,
                                transmissions: attempt + 1,
                                cfo_err_hz,
                            });
                        }
                    }
                    Ok(F1Trial {
                        delivered: false,
                        transmissions: cfg.max_retx + 1,
                        cfo_err_hz,
                    })
                })
                .collect::<Result<_>>()?;
            let delivered = trials.iter().filter(|t| t.delivered).count() as f64;
            let sent: usize = trials.iter().map(|t| t.transmissions).sum();
            let mut r = row(cfg, snr);
            r.detect_or_pass = Some(delivered / trials.len() as f64);
            r.throughput_frac = Some(delivered / sent as f64);
            r.cfo_err_hz = mean(trials.iter().map(|t| t.cfo_err_hz));
            r.wall_s = cfg.report_wall.then(|| start.elapsed().as_secs_f64());
            Ok(r)
        })
        .collect()
}

fn f2_receiver(cfg: &CampaignConfig, c: &NpuschF2Config) -> Result<F2Receiver> {
    Ok(F2Receiver::new(c.clone())?.with_options(F2Options {
        data_only: cfg.data_only,
        ..Default::default()
    }))
}

struct F2Trial {
    verdict: F2Verdict,
    cfo_err_hz: f64,
    dtx_ack: Option<bool>,
}

/// ACK trials with interleaved noise-only trials.
pub fn run_f2_campaign(cfg: &CampaignConfig, c: &NpuschF2Config) -> Result<Vec<StatsRow>> {
    let rx = f2_receiver(cfg, c)?;
    let epsilon = match table_threshold(cfg, c.repetitions)? {
        Some(e) => e,
        None => calibrate_dtx_threshold(&rx, cfg.n_rx, cfg.calibration_trials, cfg.seed)?.epsilon,
    };
    let wave = build_f2(1, c, &DefaultPilots::default())?.grid;
    let profile = cfg.model.profile();
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let start = Instant::now();
            let imp = impairment(cfg, snr, NPUSCH_SPACING_HZ);
            let trials: Vec<F2Trial> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, trial_stream(point, t, false));
                    let y = apply_channel(&wave, &imp, profile.as_ref(), &mut rng)?;
                    let (rep, blocks) = rx.receive_with_blocks(&y, epsilon)?;
                    let dtx_ack = if cfg.dtx_trials {
                        let mut rng = trial_rng(cfg.seed, trial_stream(point, t, true));
                        let n = dtx_wave(SampleRate::NPUSCH, wave.len(), &imp, &mut rng)?;
                        Some(rx.receive(&n, epsilon)?.verdict == F2Verdict::Ack)
                    } else {
                        None
                    };
                    Ok(F2Trial {
                        verdict: rep.verdict,
                        cfo_err_hz: mean(blocks.iter().map(|b| (b.cfo_hz - cfg.cfo_hz).abs())).unwrap_or(0.0),
                        dtx_ack,
                    })
                })
                .collect::<Result<_>>()?;
            let n = trials.len() as f64;
            let acks = trials.iter().filter(|t| t.verdict == F2Verdict::Ack).count() as f64;
            let mut r = row(cfg, snr);
            r.detect_or_pass = Some(acks / n);
            r.ack_miss = Some((n - acks) / n);
            r.false_alarm = cfg
                .dtx_trials
                .then(|| trials.iter().filter(|t| t.dtx_ack == Some(true)).count() as f64 / n);
            r.cfo_err_hz = mean(trials.iter().map(|t| t.cfo_err_hz));
            r.wall_s = cfg.report_wall.then(|| start.elapsed().as_secs_f64());
            Ok(r)
        })
        .collect()
}

/// Calibrates one threshold per listed `repetitions` value and merges them
/// into `table`.
pub fn calibrate(kv: &KeyValues, kind: Option<ChannelKind>, table: &mut ThresholdTable) -> Result<Vec<Threshold>> {
    let reps: Vec<usize> = kv.get_list("repetitions")?.unwrap_or_default();
    let mut kv = kv.clone();
    if kv.raw("snr_db").is_none() {
        kv.set("snr_db", 0);
    }
    let mut variants = Vec::new();
    if reps.is_empty() {
        variants.push(kv);
    } else {
        for r in reps {
            let mut v = kv.clone();
            v.set("repetitions", r);
            variants.push(v);
        }
    }
    let mut out = Vec::new();
    for v in &variants {
        let cfg = CampaignConfig::from_kv(v, kind)?;
        let th = match &cfg.waveform {
            Waveform::Nprach(c) => calibrate_threshold(
                &NprachReceiver::new(c.clone()),
                cfg.n_rx,
                cfg.calibration_trials,
                cfg.target_fa,
                cfg.seed,
            )?,
            Waveform::F2(c) => calibrate_dtx_threshold(&f2_receiver(&cfg, c)?, cfg.n_rx, cfg.calibration_trials, cfg.seed)?,
            Waveform::F1(_) => {
                return Err(Error::config("channel", "format 1 has no detection threshold"));
            }
        };
        table.insert(th);
        out.push(th);
    }
    Ok(out)
}
