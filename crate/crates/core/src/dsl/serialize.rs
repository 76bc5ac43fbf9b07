use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::RESERVED;
use crate::labstate::LabState;
use crate::network::{Network, RuleEntry, Stage};
use crate::spin::SpinLabel;
use crate::C64;

fn number(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("({:?}{}{:?}i)", z.re, sign, z.im.abs())
}

fn label(s: &str) -> String {
    let mut chars = s.chars();
    let plain = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s);
    if plain {
        s.into()
    } else {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn detectors(stage: &Stage, config: &crate::config::SignalConfig) -> String {
    if config.is_void() {
        return "void".into();
    }
    let parts: alloc::vec::Vec<String> = config.detectors().map(|d| label(&stage.detectors()[d])).collect();
    parts.join(" ")
}

fn ket(k: usize, slots: usize) -> String {
    let mut s = String::from("|");
    for slot in 0..slots {
        let bit = (k >> (slots - 1 - slot)) & 1;
        s.push(if bit == 0 { SpinLabel::H.symbol() } else { SpinLabel::V.symbol() });
    }
    s.push('>');
    s
}

fn labstate(state: &LabState, stage: &Stage) -> String {
    let parts: alloc::vec::Vec<String> = state
        .terms()
        .map(|(config, k, c)| format!("{} * {} @ {}", number(c), ket(k as usize, stage.slots()), detectors(stage, config)))
        .collect();
    if parts.is_empty() {
        format!("(0.0+0.0i) * {} @ void", ket(0, stage.slots()))
    } else {
        parts.join("\n        + ")
    }
}

/// Text form of a network. Spin is written in the `HV` basis and every
/// coefficient as a literal; parameter values are kept as comments.
pub fn serialize(net: &Network) -> String {
    let mut out = String::from("stagelab-network v1\n");
    for (name, v) in net.params() {
        let _ = writeln!(out, "# param {name} = {}", number(*v));
    }
    out.push('\n');
    for s in net.stages() {
        let labels: alloc::vec::Vec<String> = s.detectors().iter().map(|d| label(d)).collect();
        let _ = writeln!(out, "stage {} slots {} {{ {} }}", s.index(), s.slots(), labels.join(", "));
    }
    for t in net.transitions() {
        let (from, to) = (&net.stages()[t.from_stage()], &net.stages()[t.to_stage()]);
        let _ = writeln!(out, "\ntransition {} -> {} {{", t.from_stage(), t.to_stage());
        for (config, entry) in t.rules() {
            match entry {
                RuleEntry::Signal(list) => {
                    let rhs: alloc::vec::Vec<String> =
                        list.iter().map(|(c, w)| format!("{} * {}", number(*w), detectors(to, c))).collect();
                    let rhs = if rhs.is_empty() { "(0.0+0.0i) * void".into() } else { rhs.join(" + ") };
                    let _ = writeln!(out, "    {} -> {};", detectors(from, config), rhs);
                }
                RuleEntry::Joint(rules) => {
                    for r in rules {
                        let k: String = r.input.iter().map(|l| l.symbol()).collect();
                        let _ = writeln!(out, "    |{k}> @ {} -> {};", detectors(from, config), labstate(&r.output, to));
                    }
                }
            }
        }
        out.push_str("}\n");
    }
    let _ = writeln!(out, "\nsource = {};", labstate(net.source(), &net.stages()[0]));
    out
}
