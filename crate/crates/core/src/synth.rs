//! Deterministic generator of NSL-KDD-format benchmark files.
//!
//! Emits comma-separated connection records (41 attributes, attack-name
//! label, difficulty column) drawn from per-subtype generative profiles:
//! each attack subtype has a numeric prototype, a noise level and a
//! categorical signature. Two file kinds model the benchmark's structure:
//! the `Initial` kind (used for initial training) covers a subset of the
//! subtypes, while `Rounds` adds novel subtypes and services plus a shifted
//! class mixture, so a model trained on the initial file has real failures
//! to learn from. Same seed, same bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::ClassLabel;

/// Which distribution to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    /// Initial-training distribution: base subtypes only.
    Initial,
    /// Round distribution: all subtypes, including ones absent from
    /// `Initial`, with a shifted class mixture.
    Rounds,
}

/// Count of numeric attributes (everything except protocol_type, service
/// and flag).
const NUMERIC_COUNT: usize = 38;

/// (max value, decimal places) per numeric attribute, in attribute order.
/// `num_outbound_cmds` is constant zero, as in the real files.
const NUMERIC_RANGES: [(f64, u32); NUMERIC_COUNT] = [
    (60_000.0, 0), // duration
    (1_000_000.0, 0), // src_bytes
    (1_000_000.0, 0), // dst_bytes
    (1.0, 0),      // land
    (3.0, 0),      // wrong_fragment
    (3.0, 0),      // urgent
    (30.0, 0),     // hot
    (5.0, 0),      // num_failed_logins
    (1.0, 0),      // logged_in
    (100.0, 0),    // num_compromised
    (1.0, 0),      // root_shell
    (2.0, 0),      // su_attempted
    (100.0, 0),    // num_root
    (40.0, 0),     // num_file_creations
    (2.0, 0),      // num_shells
    (8.0, 0),      // num_access_files
    (0.0, 0),      // num_outbound_cmds (constant)
    (1.0, 0),      // is_host_login
    (1.0, 0),      // is_guest_login
    (511.0, 0),    // count
    (511.0, 0),    // srv_count
    (1.0, 2),      // serror_rate
    (1.0, 2),      // srv_serror_rate
    (1.0, 2),      // rerror_rate
    (1.0, 2),      // srv_rerror_rate
    (1.0, 2),      // same_srv_rate
    (1.0, 2),      // diff_srv_rate
    (1.0, 2),      // srv_diff_host_rate
    (255.0, 0),    // dst_host_count
    (255.0, 0),    // dst_host_srv_count
    (1.0, 2),      // dst_host_same_srv_rate
    (1.0, 2),      // dst_host_diff_srv_rate
    (1.0, 2),      // dst_host_same_src_port_rate
    (1.0, 2),      // dst_host_srv_diff_host_rate
    (1.0, 2),      // dst_host_serror_rate
    (1.0, 2),      // dst_host_srv_serror_rate
    (1.0, 2),      // dst_host_rerror_rate
    (1.0, 2),      // dst_host_srv_rerror_rate
];

/// Categorical signature: (protocol, service, flag).
type CatTriple = (&'static str, &'static str, &'static str);

/// How a subtype's numeric prototype is placed.
enum Placement {
    /// Independent region: `dims` attributes deviate from the shared
    /// background by up to `scale`.
    Fresh { dims: usize, scale: f64 },
    /// Anchored near another subtype's prototype, offset on a few
    /// attributes; models traffic that masquerades as the donor until the
    /// engine learns it.
    NearDonor {
        donor: &'static str,
        dims: usize,
        scale: f64,
    },
}

struct SubtypeDef {
    /// Internal profile name; also seeds the prototype.
    profile: &'static str,
    /// Attack-name label written to the file.
    label: &'static str,
    class: ClassLabel,
    placement: Placement,
    noise: f64,
    dominant: CatTriple,
    alternate: CatTriple,
    dominant_prob: f64,
    weight_initial: f64,
    weight_rounds: f64,
}

fn roster() -> Vec<SubtypeDef> {
    use ClassLabel::*;
    use Placement::*;
    vec![
        // ---- normal traffic profiles (all labeled "normal")
        SubtypeDef {
            profile: "normal_web",
            label: "normal",
            class: Normal,
            placement: Fresh { dims: 8, scale: 0.45 },
            noise: 0.05,
            dominant: ("tcp", "http", "SF"),
            alternate: ("tcp", "http", "REJ"),
            dominant_prob: 0.92,
            weight_initial: 0.45,
            weight_rounds: 0.38,
        },
        SubtypeDef {
            profile: "normal_smtp",
            label: "normal",
            class: Normal,
            placement: Fresh { dims: 8, scale: 0.40 },
            noise: 0.05,
            dominant: ("tcp", "smtp", "SF"),
            alternate: ("tcp", "smtp", "S1"),
            dominant_prob: 0.9,
            weight_initial: 0.20,
            weight_rounds: 0.16,
        },
        SubtypeDef {
            profile: "normal_ftp",
            label: "normal",
            class: Normal,
            placement: Fresh { dims: 7, scale: 0.40 },
            noise: 0.06,
            dominant: ("tcp", "ftp_data", "SF"),
            alternate: ("tcp", "ftp", "SF"),
            dominant_prob: 0.8,
            weight_initial: 0.15,
            weight_rounds: 0.16,
        },
        SubtypeDef {
            profile: "normal_dns",
            label: "normal",
            class: Normal,
            placement: Fresh { dims: 7, scale: 0.40 },
            noise: 0.05,
            dominant: ("udp", "domain_u", "SF"),
            alternate: ("udp", "domain_u", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.20,
            weight_rounds: 0.15,
        },
        // Novel normal profile: appears only in the round stream.
        SubtypeDef {
            profile: "normal_telnet",
            label: "normal",
            class: Normal,
            placement: Fresh { dims: 7, scale: 0.45 },
            noise: 0.06,
            dominant: ("tcp", "telnet", "SF"),
            alternate: ("tcp", "telnet", "RSTO"),
            dominant_prob: 0.85,
            weight_initial: 0.0,
            weight_rounds: 0.15,
        },
        // ---- denial of service
        SubtypeDef {
            profile: "neptune",
            label: "neptune",
            class: Dos,
            placement: Fresh { dims: 10, scale: 0.50 },
            noise: 0.04,
            dominant: ("tcp", "private", "S0"),
            alternate: ("tcp", "private", "REJ"),
            dominant_prob: 0.85,
            weight_initial: 0.50,
            weight_rounds: 0.40,
        },
        SubtypeDef {
            profile: "smurf",
            label: "smurf",
            class: Dos,
            placement: Fresh { dims: 10, scale: 0.50 },
            noise: 0.03,
            dominant: ("icmp", "ecr_i", "SF"),
            alternate: ("icmp", "ecr_i", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.30,
            weight_rounds: 0.25,
        },
        // Novel DoS that masquerades as web traffic.
        SubtypeDef {
            profile: "back",
            label: "back",
            class: Dos,
            placement: NearDonor {
                donor: "normal_web",
                dims: 3,
                scale: 0.40,
            },
            noise: 0.04,
            dominant: ("tcp", "http", "SF"),
            alternate: ("tcp", "http_443", "RSTR"),
            dominant_prob: 0.8,
            weight_initial: 0.0,
            weight_rounds: 0.15,
        },
        SubtypeDef {
            profile: "teardrop",
            label: "teardrop",
            class: Dos,
            placement: Fresh { dims: 8, scale: 0.45 },
            noise: 0.04,
            dominant: ("udp", "private", "SF"),
            alternate: ("udp", "private", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.10,
            weight_rounds: 0.10,
        },
        SubtypeDef {
            profile: "pod",
            label: "pod",
            class: Dos,
            placement: NearDonor {
                donor: "smurf",
                dims: 3,
                scale: 0.35,
            },
            noise: 0.04,
            dominant: ("icmp", "ecr_i", "SF"),
            alternate: ("icmp", "eco_i", "SF"),
            dominant_prob: 0.9,
            weight_initial: 0.0,
            weight_rounds: 0.07,
        },
        SubtypeDef {
            profile: "land",
            label: "land",
            class: Dos,
            placement: Fresh { dims: 6, scale: 0.50 },
            noise: 0.05,
            dominant: ("tcp", "finger", "S0"),
            alternate: ("tcp", "finger", "RSTO"),
            dominant_prob: 0.9,
            weight_initial: 0.10,
            weight_rounds: 0.03,
        },
        // ---- probing
        SubtypeDef {
            profile: "satan",
            label: "satan",
            class: Probe,
            placement: Fresh { dims: 8, scale: 0.45 },
            noise: 0.05,
            dominant: ("tcp", "private", "REJ"),
            alternate: ("tcp", "other", "REJ"),
            dominant_prob: 0.75,
            weight_initial: 0.40,
            weight_rounds: 0.30,
        },
        SubtypeDef {
            profile: "ipsweep",
            label: "ipsweep",
            class: Probe,
            placement: Fresh { dims: 7, scale: 0.45 },
            noise: 0.05,
            dominant: ("icmp", "eco_i", "SF"),
            alternate: ("icmp", "eco_i", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.30,
            weight_rounds: 0.25,
        },
        // Novel probe that looks like the neptune flood.
        SubtypeDef {
            profile: "portsweep",
            label: "portsweep",
            class: Probe,
            placement: NearDonor {
                donor: "neptune",
                dims: 3,
                scale: 0.40,
            },
            noise: 0.05,
            dominant: ("tcp", "private", "REJ"),
            alternate: ("tcp", "private", "S0"),
            dominant_prob: 0.7,
            weight_initial: 0.0,
            weight_rounds: 0.25,
        },
        SubtypeDef {
            profile: "nmap",
            label: "nmap",
            class: Probe,
            placement: Fresh { dims: 7, scale: 0.50 },
            noise: 0.05,
            dominant: ("tcp", "private", "SH"),
            alternate: ("icmp", "eco_i", "SF"),
            dominant_prob: 0.8,
            weight_initial: 0.30,
            weight_rounds: 0.20,
        },
        // ---- remote-to-local
        SubtypeDef {
            profile: "guess_passwd",
            label: "guess_passwd",
            class: R2l,
            placement: NearDonor {
                donor: "normal_ftp",
                dims: 3,
                scale: 0.30,
            },
            noise: 0.09,
            dominant: ("tcp", "ftp", "SF"),
            alternate: ("tcp", "telnet", "SF"),
            dominant_prob: 0.8,
            weight_initial: 0.40,
            weight_rounds: 0.25,
        },
        SubtypeDef {
            profile: "warezclient",
            label: "warezclient",
            class: R2l,
            placement: NearDonor {
                donor: "normal_ftp",
                dims: 3,
                scale: 0.25,
            },
            noise: 0.10,
            dominant: ("tcp", "ftp_data", "SF"),
            alternate: ("tcp", "ftp", "SF"),
            dominant_prob: 0.85,
            weight_initial: 0.40,
            weight_rounds: 0.25,
        },
        // Novel R2L near normal ftp traffic.
        SubtypeDef {
            profile: "warezmaster",
            label: "warezmaster",
            class: R2l,
            placement: NearDonor {
                donor: "normal_ftp",
                dims: 2,
                scale: 0.30,
            },
            noise: 0.05,
            dominant: ("tcp", "ftp_data", "SF"),
            alternate: ("tcp", "ftp_data", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.0,
            weight_rounds: 0.20,
        },
        SubtypeDef {
            profile: "imap",
            label: "imap",
            class: R2l,
            placement: NearDonor {
                donor: "normal_smtp",
                dims: 3,
                scale: 0.30,
            },
            noise: 0.05,
            dominant: ("tcp", "imap4", "SF"),
            alternate: ("tcp", "imap4", "S0"),
            dominant_prob: 0.85,
            weight_initial: 0.10,
            weight_rounds: 0.15,
        },
        SubtypeDef {
            profile: "multihop",
            label: "multihop",
            class: R2l,
            placement: Fresh { dims: 5, scale: 0.30 },
            noise: 0.07,
            dominant: ("tcp", "telnet", "SF"),
            alternate: ("tcp", "login", "SF"),
            dominant_prob: 0.85,
            weight_initial: 0.10,
            weight_rounds: 0.15,
        },
        // ---- user-to-root
        SubtypeDef {
            profile: "buffer_overflow",
            label: "buffer_overflow",
            class: U2r,
            placement: NearDonor {
                donor: "normal_web",
                dims: 2,
                scale: 0.28,
            },
            noise: 0.10,
            dominant: ("tcp", "telnet", "SF"),
            alternate: ("tcp", "http", "SF"),
            dominant_prob: 0.7,
            weight_initial: 0.50,
            weight_rounds: 0.30,
        },
        SubtypeDef {
            profile: "rootkit",
            label: "rootkit",
            class: U2r,
            placement: NearDonor {
                donor: "normal_ftp",
                dims: 2,
                scale: 0.25,
            },
            noise: 0.11,
            dominant: ("tcp", "telnet", "SF"),
            alternate: ("tcp", "ftp", "SF"),
            dominant_prob: 0.7,
            weight_initial: 0.30,
            weight_rounds: 0.20,
        },
        // Novel U2R near smtp traffic.
        SubtypeDef {
            profile: "loadmodule",
            label: "loadmodule",
            class: U2r,
            placement: NearDonor {
                donor: "normal_smtp",
                dims: 2,
                scale: 0.28,
            },
            noise: 0.06,
            dominant: ("tcp", "smtp", "SF"),
            alternate: ("tcp", "smtp", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.0,
            weight_rounds: 0.25,
        },
        SubtypeDef {
            profile: "perl",
            label: "perl",
            class: U2r,
            placement: Fresh { dims: 4, scale: 0.30 },
            noise: 0.06,
            dominant: ("tcp", "telnet", "SF"),
            alternate: ("tcp", "telnet", "SF"),
            dominant_prob: 1.0,
            weight_initial: 0.20,
            weight_rounds: 0.25,
        },
    ]
}

/// Class mixture per file kind, in `ClassLabel::ALL` order.
fn class_mixture(kind: FileKind) -> [f64; 5] {
    match kind {
        FileKind::Initial => [0.53, 0.36, 0.07, 0.03, 0.01],
        FileKind::Rounds => [0.50, 0.33, 0.10, 0.05, 0.02],
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Standard normal via Box-Muller.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Shared background the prototypes deviate from.
fn background() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB06);
    (0..NUMERIC_COUNT)
        .map(|_| rng.random_range(0.2..0.8))
        .collect()
}

/// Builds every subtype's numeric prototype (donors resolved first).
fn build_prototypes(defs: &[SubtypeDef]) -> Vec<Vec<f64>> {
    let bg = background();
    let mut prototypes: Vec<Option<Vec<f64>>> = vec![None; defs.len()];
    // Fresh placements first, then donor-anchored ones.
    for (idx, def) in defs.iter().enumerate() {
        if let Placement::Fresh { dims, scale } = def.placement {
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(def.profile));
            let mut proto = bg.clone();
            for _ in 0..dims {
                let dim = rng.random_range(0..NUMERIC_COUNT);
                let sign = if rng.random_range(0.0..1.0) < 0.5 {
                    -1.0
                } else {
                    1.0
                };
                let magnitude = scale * rng.random_range(0.5..1.0);
                proto[dim] = (proto[dim] + sign * magnitude).clamp(0.0, 1.0);
            }
            prototypes[idx] = Some(proto);
        }
    }
    for (idx, def) in defs.iter().enumerate() {
        if let Placement::NearDonor { donor, dims, scale } = def.placement {
            let donor_idx = defs
                .iter()
                .position(|d| d.profile == donor)
                .expect("donor profile exists");
            let base = prototypes[donor_idx]
                .clone()
                .expect("donor prototypes are fresh placements");
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(def.profile));
            let mut proto = base;
            for _ in 0..dims {
                let dim = rng.random_range(0..NUMERIC_COUNT);
                let sign = if rng.random_range(0.0..1.0) < 0.5 {
                    -1.0
                } else {
                    1.0
                };
                let magnitude = scale * rng.random_range(0.75..1.25);
                proto[dim] = (proto[dim] + sign * magnitude).clamp(0.0, 1.0);
            }
            prototypes[idx] = Some(proto);
        }
    }
    prototypes.into_iter().map(Option::unwrap).collect()
}

fn format_numeric(value01: f64, range: (f64, u32)) -> String {
    let (max, decimals) = range;
    let raw = (value01.clamp(0.0, 1.0)) * max;
    if decimals == 0 {
        format!("{}", raw.round() as i64)
    } else {
        format!("{raw:.2}")
    }
}

/// Writes `records` generated lines to `writer`.
pub fn generate(
    writer: &mut impl Write,
    kind: FileKind,
    records: usize,
    seed: u64,
) -> io::Result<()> {
    let defs = roster();
    let prototypes = build_prototypes(&defs);
    let mixture = class_mixture(kind);

    // Per-class cumulative subtype weights for this file kind.
    let mut per_class: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ClassLabel::ALL.len()];
    for (idx, def) in defs.iter().enumerate() {
        let weight = match kind {
            FileKind::Initial => def.weight_initial,
            FileKind::Rounds => def.weight_rounds,
        };
        if weight > 0.0 {
            let class_idx = ClassLabel::ALL.iter().position(|c| *c == def.class).unwrap();
            per_class[class_idx].push((idx, weight));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut line = String::with_capacity(256);
    for _ in 0..records {
        // Pick class, then subtype.
        let class_draw: f64 = rng.random_range(0.0..1.0);
        let mut class_idx = 0;
        let mut acc = 0.0;
        for (i, w) in mixture.iter().enumerate() {
            acc += w;
            if class_draw < acc {
                class_idx = i;
                break;
            }
            class_idx = i;
        }
        let pool = &per_class[class_idx];
        let total: f64 = pool.iter().map(|(_, w)| w).sum();
        let mut subtype_draw: f64 = rng.random_range(0.0..total);
        let mut chosen = pool[pool.len() - 1].0;
        for (idx, w) in pool {
            if subtype_draw < *w {
                chosen = *idx;
                break;
            }
            subtype_draw -= w;
        }
        let def = &defs[chosen];
        let proto = &prototypes[chosen];

        let (protocol, service, flag) = if rng.random_range(0.0..1.0) < def.dominant_prob {
            def.dominant
        } else {
            def.alternate
        };

        line.clear();
        let mut numeric_idx = 0usize;
        for attr in 0..41 {
            if attr > 0 {
                line.push(',');
            }
            match attr {
                1 => line.push_str(protocol),
                2 => line.push_str(service),
                3 => line.push_str(flag),
                _ => {
                    let value = proto[numeric_idx] + def.noise * normal(&mut rng);
                    line.push_str(&format_numeric(value, NUMERIC_RANGES[numeric_idx]));
                    numeric_idx += 1;
                }
            }
        }
        line.push(',');
        line.push_str(def.label);
        line.push(',');
        line.push_str(&format!("{}", rng.random_range(0..=21u32)));
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Generates a file at `path`.
pub fn generate_to_path(
    path: impl AsRef<Path>,
    kind: FileKind,
    records: usize,
    seed: u64,
) -> io::Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    generate(&mut writer, kind, records, seed)?;
    writer.flush()
}

/// The attack names the generator emits, with their classes; tests check
/// these against the shipped mapping file.
pub fn emitted_labels() -> Vec<(&'static str, ClassLabel)> {
    let mut out: Vec<(&'static str, ClassLabel)> = roster()
        .iter()
        .map(|d| (d.label, d.class))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
