//! The line-oriented trace file format.
//!
//! ```text
//! #siot-trace v1 objects=<n> events=<m> seed=<s>
//! P <id> F:<id,...> C:<cid,...> M:<gid,...>
//! B <id> <kind> pg=<f> pb=<f> sw=<f> per=<u>
//! E <seq> <tick> <trustor> <trustee>
//! ```
//!
//! One `P` line per object (sorted by id), one `B` line per object, then
//! the events in sequence order. Counts in the header must match the body;
//! loading validates every reference and event invariant. Writing the same
//! trace twice produces byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::behavior::{BehaviorKind, BehaviorModel};
use crate::graph::{CommunityId, GroupId, Network, ObjectId, SocialProfile};
use crate::trace::{TraceData, TraceError, TraceEvent, TraceHeader};

pub const FORMAT_VERSION: u32 = 1;

/// Renders a trace to its canonical text form.
pub fn write_trace(data: &TraceData) -> String {
    let mut out = String::new();
    let _ = write!(out, "#siot-trace v{} objects={} events={}", FORMAT_VERSION, data.network.len(), data.events.len());
    if let Some(seed) = data.header.generator_seed {
        let _ = write!(out, " seed={seed}");
    }
    out.push('\n');
    for id in data.network.roster() {
        let profile = data.network.profile(id).expect("roster ids resolve");
        let _ = writeln!(
            out,
            "P {} F:{} C:{} M:{}",
            id,
            join_ids(profile.friends.iter().map(|f| f.0)),
            join_ids(profile.communities.iter().map(|c| c.0)),
            join_ids(profile.multicast_groups.iter().map(|g| g.0)),
        );
    }
    for (id, model) in &data.behaviors {
        let _ = writeln!(
            out,
            "B {} {} pg={} pb={} sw={} per={}",
            id,
            model.kind(),
            model.p_good_service(),
            model.p_bad_service(),
            model.switch_point(),
            model.on_off_period(),
        );
    }
    for event in &data.events {
        let _ = writeln!(out, "E {} {} {} {}", event.seq, event.tick, event.trustor, event.trustee);
    }
    out
}

fn join_ids(ids: impl Iterator<Item = u32>) -> String {
    let mut s = String::new();
    for (i, id) in ids.enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{id}");
    }
    s
}

/// Parses a trace from its text form, validating counts, references and
/// event ordering.
pub fn read_trace(text: &str) -> Result<TraceData, TraceError> {
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = parse_header(header_line)?;

    let mut network = Network::new();
    let mut behaviors: BTreeMap<ObjectId, BehaviorModel> = BTreeMap::new();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut prev_seq: Option<u64> = None;
    let mut prev_tick: Option<u64> = None;

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_ascii_whitespace();
        match tokens.next() {
            Some("P") => {
                let id = parse_field::<ObjectId>(tokens.next(), line_no, "object id")?;
                let friends = parse_id_list(tokens.next(), "F:", line_no)?;
                let communities = parse_id_list(tokens.next(), "C:", line_no)?;
                let groups = parse_id_list(tokens.next(), "M:", line_no)?;
                let profile = SocialProfile {
                    friends: friends.into_iter().map(ObjectId).collect(),
                    communities: communities.into_iter().map(CommunityId).collect(),
                    multicast_groups: groups.into_iter().map(GroupId).collect(),
                };
                network.add_object(id, profile)?;
            }
            Some("B") => {
                let id = parse_field::<ObjectId>(tokens.next(), line_no, "object id")?;
                if !network.contains(id) {
                    return Err(TraceError::UnknownObject { line: line_no, id });
                }
                let kind = parse_field::<BehaviorKind>(tokens.next(), line_no, "behavior kind")?;
                let pg = parse_kv(tokens.next(), "pg=", line_no)?;
                let pb = parse_kv(tokens.next(), "pb=", line_no)?;
                let sw = parse_kv(tokens.next(), "sw=", line_no)?;
                let per = parse_kv::<u64>(tokens.next(), "per=", line_no)?;
                behaviors.insert(id, BehaviorModel::new(kind, pg, pb, sw, per)?);
            }
            Some("E") => {
                let seq = parse_field::<u64>(tokens.next(), line_no, "event seq")?;
                let tick = parse_field::<u64>(tokens.next(), line_no, "event tick")?;
                let trustor = parse_field::<ObjectId>(tokens.next(), line_no, "trustor id")?;
                let trustee = parse_field::<ObjectId>(tokens.next(), line_no, "trustee id")?;
                if trustor == trustee {
                    return Err(TraceError::SelfInteraction { seq, id: trustor });
                }
                if prev_seq.is_some_and(|p| seq <= p) {
                    return Err(TraceError::NonMonotonicSeq { seq });
                }
                if prev_tick.is_some_and(|p| tick < p) {
                    return Err(TraceError::NonMonotonicTime { seq });
                }
                for id in [trustor, trustee] {
                    if !network.contains(id) {
                        return Err(TraceError::UnknownObject { line: line_no, id });
                    }
                }
                prev_seq = Some(seq);
                prev_tick = Some(tick);
                events.push(TraceEvent { seq, tick, trustor, trustee });
            }
            Some(other) => {
                return Err(parse_err(line_no, format!("unknown record type `{other}`")));
            }
            None => unreachable!("blank lines are skipped"),
        }
    }

    network.validate()?;
    if network.len() != header.object_count {
        return Err(TraceError::CountMismatch {
            what: "object",
            declared: header.object_count,
            found: network.len(),
        });
    }
    if events.len() != header.event_count {
        return Err(TraceError::CountMismatch {
            what: "event",
            declared: header.event_count,
            found: events.len(),
        });
    }
    if behaviors.len() != header.object_count {
        return Err(TraceError::CountMismatch {
            what: "behavior",
            declared: header.object_count,
            found: behaviors.len(),
        });
    }
    Ok(TraceData { header, network, events, behaviors })
}

/// Loads and validates a trace file from disk.
pub fn load_trace(path: &Path) -> Result<TraceData, TraceError> {
    read_trace(&fs::read_to_string(path)?)
}

fn parse_header(line: &str) -> Result<TraceHeader, TraceError> {
    let mut tokens = line.split_ascii_whitespace();
    let magic = tokens.next().unwrap_or_default();
    let version = magic
        .strip_prefix("#siot-trace")
        .and_then(|_| tokens.next())
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| parse_err(1, "expected header `#siot-trace v1 objects=<n> events=<m>`"))?;
    if version != FORMAT_VERSION {
        return Err(parse_err(1, format!("unsupported format version {version}")));
    }
    let mut object_count = None;
    let mut event_count = None;
    let mut seed = None;
    for token in tokens {
        if let Some(v) = token.strip_prefix("objects=") {
            object_count = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("events=") {
            event_count = v.parse::<usize>().ok();
        } else if let Some(v) = token.strip_prefix("seed=") {
            seed = v.parse::<u64>().ok();
        } else {
            return Err(parse_err(1, format!("unknown header field `{token}`")));
        }
    }
    Ok(TraceHeader {
        object_count: object_count.ok_or_else(|| parse_err(1, "missing objects= count"))?,
        event_count: event_count.ok_or_else(|| parse_err(1, "missing events= count"))?,
        generator_seed: seed,
        format_version: version,
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Parse { line, message: message.into() }
}

fn parse_field<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T, TraceError> {
    token
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse::<T>()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

fn parse_kv<T: FromStr>(token: Option<&str>, key: &str, line: usize) -> Result<T, TraceError> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {key} field")))?;
    let value = token
        .strip_prefix(key)
        .ok_or_else(|| parse_err(line, format!("expected {key} field, got `{token}`")))?;
    value.parse::<T>().map_err(|_| parse_err(line, format!("invalid {key} value `{value}`")))
}

fn parse_id_list(token: Option<&str>, key: &str, line: usize) -> Result<Vec<u32>, TraceError> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {key} list")))?;
    let body = token
        .strip_prefix(key)
        .ok_or_else(|| parse_err(line, format!("expected {key} list, got `{token}`")))?;
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|part| {
            part.parse::<u32>().map_err(|_| parse_err(line, format!("invalid id `{part}` in {key} list")))
        })
        .collect()
}
