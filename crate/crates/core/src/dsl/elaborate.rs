use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::ast::*;
use super::expr::eval;
use super::parser::parse;
use super::{DslError, Pos, CONSTRAINT_TOL};
use crate::config::SignalConfig;
use crate::labstate::LabState;
use crate::network::{Network, Stage, StageTransition};
use crate::spin::SpinVector;
use crate::C64;

/// Parameter values in declaration order, with `overrides` replacing the
/// declared expressions. Later parameters see the overridden values.
pub fn evaluate_params(doc: &NetworkDoc, overrides: &[(String, C64)]) -> Result<Vec<(String, C64)>, DslError> {
    for (name, _) in overrides {
        if !doc.params().any(|p| &p.name == name) {
            return Err(DslError::UnknownOverride(name.clone()));
        }
    }
    let mut env = BTreeMap::new();
    let mut out = Vec::new();
    for p in doc.params() {
        let v = match overrides.iter().rev().find(|(n, _)| *n == p.name) {
            Some((_, v)) if v.re.is_finite() && v.im.is_finite() => *v,
            Some(_) => return Err(DslError::NonFinite { line: p.pos.line, col: p.pos.col }),
            None => eval(&p.value, &env)?,
        };
        env.insert(p.name.clone(), v);
        out.push((p.name.clone(), v));
    }
    Ok(out)
}

struct Ctx<'a> {
    env: BTreeMap<String, C64>,
    stages: &'a [Stage],
}

impl Ctx<'_> {
    fn config(&self, stage: usize, term: &Term) -> Result<SignalConfig, DslError> {
        let names: Vec<&str> = term.detectors.iter().map(|l| l.name.as_str()).collect();
        let st = &self.stages[stage];
        let idx = names
            .iter()
            .zip(&term.detectors)
            .map(|(n, l)| {
                st.detector(n).ok_or_else(|| DslError::UndeclaredIdentifier {
                    name: l.name.clone(),
                    line: l.pos.line,
                    col: l.pos.col,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SignalConfig::new(idx).map_err(|_| DslError::structure(term.pos, "detector listed twice in one term"))
    }

    fn coefficient(&self, item: &Item) -> Result<C64, DslError> {
        let c = match &item.coef {
            Some(e) => eval(e, &self.env)?,
            None => C64::new(1.0, 0.0),
        };
        Ok(if item.negate { -c } else { c })
    }

    fn spin(&self, stage: usize, term: &Term) -> Result<SpinVector, DslError> {
        let slots = self.stages[stage].slots();
        let Some((ket, pos)) = &term.ket else {
            return Err(DslError::structure(term.pos, format!("term needs a {slots}-slot spin ket")));
        };
        if ket.len() != slots {
            return Err(DslError::structure(*pos, format!("ket has {} slots, stage {stage} has {slots}", ket.len())));
        }
        SpinVector::ket(ket).map_err(|e| DslError::semantic(*pos, e))
    }

    fn labstate(&self, stage: usize, items: &[Item]) -> Result<LabState, DslError> {
        let mut out = LabState::zero(stage, self.stages[stage].slots());
        for item in items {
            let term = LabState::term(stage, &self.spin(stage, &item.term)?, self.config(stage, &item.term)?, self.coefficient(item)?);
            out = out.try_add(&term).map_err(|e| DslError::semantic(item.term.pos, e))?;
        }
        Ok(out)
    }
}

/// Substitute parameters, check constraints and build the network.
pub fn elaborate(doc: &NetworkDoc, overrides: &[(String, C64)]) -> Result<Network, DslError> {
    let params = evaluate_params(doc, overrides)?;
    let env: BTreeMap<String, C64> = params.iter().cloned().collect();

    for d in &doc.decls {
        if let Decl::Constraint(c) = d {
            let residual = (eval(&c.lhs, &env)? - eval(&c.rhs, &env)?).norm();
            if !(residual <= CONSTRAINT_TOL) {
                return Err(DslError::ConstraintViolated { line: c.pos.line, col: c.pos.col, residual });
            }
        }
    }

    let mut decls: Vec<&StageDecl> = doc.stages().collect();
    decls.sort_by_key(|s| s.index);
    let mut stages = Vec::with_capacity(decls.len());
    for (n, s) in decls.iter().enumerate() {
        if s.index != n {
            return Err(DslError::structure(s.pos, format!("stage indices must run 0, 1, 2, ... (missing stage {n})")));
        }
        let st = Stage::new(s.index, s.slots, s.labels.iter().map(|l| l.name.clone()))
            .map_err(|e| DslError::semantic(s.pos, e))?;
        stages.push(st);
    }
    if stages.len() < 2 {
        return Err(DslError::structure(Pos { line: 1, col: 1 }, "a network needs at least two stages"));
    }

    let ctx = Ctx { env, stages: &stages };
    let mut transitions: Vec<Option<StageTransition>> = (1..stages.len()).map(|_| None).collect();
    for d in &doc.decls {
        let Decl::Transition(t) = d else { continue };
        if t.to != t.from + 1 {
            return Err(DslError::structure(t.pos, format!("transition {} -> {} must join consecutive stages", t.from, t.to)));
        }
        let slot = &mut transitions[t.from];
        if slot.is_some() {
            return Err(DslError::DuplicateDeclaration {
                name: format!("transition {} -> {}", t.from, t.to),
                line: t.pos.line,
                col: t.pos.col,
            });
        }
        let mut tr = StageTransition::new(&stages[t.from], &stages[t.to]);
        for rule in &t.rules {
            let input = ctx.config(t.from, &rule.input)?;
            match &rule.input.ket {
                Some((ket, pos)) => {
                    if ket.len() != stages[t.from].slots() {
                        return Err(DslError::structure(*pos, format!(
                            "ket has {} slots, stage {} has {}",
                            ket.len(),
                            t.from,
                            stages[t.from].slots()
                        )));
                    }
                    let out = ctx.labstate(t.to, &rule.output)?;
                    tr.add_joint_rule(ket.clone(), input, out).map_err(|e| DslError::semantic(rule.pos, e))?;
                }
                None => {
                    let mut out = Vec::with_capacity(rule.output.len());
                    for item in &rule.output {
                        if let Some((_, pos)) = &item.term.ket {
                            return Err(DslError::structure(*pos, "a rule without an input ket carries spin unchanged; drop the output ket"));
                        }
                        out.push((ctx.config(t.to, &item.term)?, ctx.coefficient(item)?));
                    }
                    tr.add_signal_rule(input, out).map_err(|e| DslError::semantic(rule.pos, e))?;
                }
            }
        }
        *slot = Some(tr);
    }
    let transitions = transitions
        .into_iter()
        .enumerate()
        .map(|(n, t)| t.ok_or_else(|| DslError::structure(Pos { line: 1, col: 1 }, format!("missing transition {n} -> {}", n + 1))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut sources = doc.decls.iter().filter_map(|d| match d {
        Decl::Source(s) => Some(s),
        _ => None,
    });
    let src = sources.next().ok_or_else(|| DslError::structure(Pos { line: 1, col: 1 }, "missing `source` declaration"))?;
    if let Some(dup) = sources.next() {
        return Err(DslError::DuplicateDeclaration { name: "source".into(), line: dup.pos.line, col: dup.pos.col });
    }
    let source = ctx.labstate(0, &src.items)?;
    let net = Network::new(stages.clone(), transitions, source).map_err(|e| DslError::semantic(src.pos, e))?;
    Ok(net.with_params(params))
}

/// [`parse`] followed by [`elaborate`].
pub fn load(text: &str, overrides: &[(String, C64)]) -> Result<Network, DslError> {
    elaborate(&parse(text)?, overrides)
}
