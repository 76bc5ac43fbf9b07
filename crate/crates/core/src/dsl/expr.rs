use alloc::collections::BTreeMap;
use alloc::string::String;


use super::ast::{BinOp, Expr, ExprKind, Func};
use super::DslError;
use crate::C64;
#[allow(unused_imports)] // f64 math comes from std when it is linked
use num_traits::Float;

fn pow(base: C64, exp: C64) -> C64 {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 64.0 {
        return base.powi(exp.re as i32);
    }
    if exp.im == 0.0 && base.im == 0.0 && base.re >= 0.0 {
        return C64::new(base.re.powf(exp.re), 0.0);
    }
    if base == C64::new(0.0, 0.0) {
        return if exp.re > 0.0 { base } else { C64::new(f64::NAN, f64::NAN) };
    }
    base.powc(exp)
}

fn call(f: Func, z: C64) -> C64 {
    match f {
        Func::Sqrt if z.im == 0.0 && z.re >= 0.0 => C64::new(z.re.sqrt(), 0.0),
        // principal root on the negative axis regardless of the sign of zero
        Func::Sqrt if z.im == 0.0 => C64::new(0.0, (-z.re).sqrt()),
        Func::Sqrt => z.sqrt(),
        Func::Exp => z.exp(),
        Func::Cos => z.cos(),
        Func::Sin => z.sin(),
        Func::Conj => z.conj(),
    }
}

/// Evaluate with parameters taken from `env`.
pub fn eval(e: &Expr, env: &BTreeMap<String, C64>) -> Result<C64, DslError> {
    let v = match &e.kind {
        ExprKind::Num(x) => C64::new(*x, 0.0),
        ExprKind::Imag(x) => C64::new(0.0, *x),
        ExprKind::Param(name) => *env.get(name).ok_or_else(|| DslError::UndeclaredIdentifier {
            name: name.clone(),
            line: e.pos.line,
            col: e.pos.col,
        })?,
        ExprKind::Neg(inner) => -eval(inner, env)?,
        ExprKind::Call(f, arg) => call(*f, eval(arg, env)?),
        ExprKind::Binary(op, a, b) => {
            let (a, b) = (eval(a, env)?, eval(b, env)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == C64::new(0.0, 0.0) {
                        return Err(DslError::NonFinite { line: e.pos.line, col: e.pos.col });
                    }
                    a / b
                }
                BinOp::Pow => pow(a, b),
            }
        }
    };
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(DslError::NonFinite { line: e.pos.line, col: e.pos.col });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::super::Decl;
    use super::*;
    use alloc::format;

    fn value(src: &str) -> C64 {
        let doc = parse(&format!("param x = {src};")).unwrap();
        let Decl::Param(p) = &doc.decls[0] else { panic!() };
        eval(&p.value, &BTreeMap::new()).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn operators() {
        assert!(close(value("1+2i"), C64::new(1.0, 2.0)));
        assert!(close(value("2*3+4"), C64::new(10.0, 0.0)));
        assert!(close(value("2+3*4"), C64::new(14.0, 0.0)));
        assert!(close(value("8/2/2"), C64::new(2.0, 0.0)));
        assert!(close(value("7-2-1"), C64::new(4.0, 0.0)));
        assert!(close(value("2^3^2"), C64::new(512.0, 0.0)));
        assert!(close(value("-2^2"), C64::new(-4.0, 0.0)));
        assert!(close(value("(1+i)*(1-i)"), C64::new(2.0, 0.0)));
        assert!(close(value("i*i"), C64::new(-1.0, 0.0)));
        assert!(close(value("--3"), C64::new(3.0, 0.0)));
    }

    #[test]
    fn functions() {
        assert!(close(value("sqrt(2)^2"), C64::new(2.0, 0.0)));
        assert!(close(value("sqrt(-4)"), C64::new(0.0, 2.0)));
        assert!(close(value("exp(i*0)"), C64::new(1.0, 0.0)));
        assert!(close(value("cos(0) + sin(0)"), C64::new(1.0, 0.0)));
        assert!(close(value("conj(3-4i)"), C64::new(3.0, 4.0)));
        assert!(close(value("4^0.5"), C64::new(2.0, 0.0)));
        assert!(close(value("i^2"), C64::new(-1.0, 0.0)));
    }

    #[test]
    fn standalone_expressions_see_parameters() {
        let mut env = BTreeMap::new();
        env.insert(String::from("t3"), C64::new(0.6, 0.0));
        let v = super::super::evaluate("sqrt(1-t3^2)", &env).unwrap();
        assert!(close(v, C64::new(0.8, 0.0)));
        assert!(super::super::evaluate("t4", &env).is_err());
        assert!(super::super::evaluate("1 2", &env).is_err());
    }

    #[test]
    fn non_finite_is_reported() {
        let doc = parse("param x = 1/0;").unwrap();
        let Decl::Param(p) = &doc.decls[0] else { panic!() };
        assert!(matches!(eval(&p.value, &BTreeMap::new()), Err(DslError::NonFinite { .. })));
        let doc = parse("param x = 10^400;").unwrap();
        let Decl::Param(p) = &doc.decls[0] else { panic!() };
        assert!(matches!(eval(&p.value, &BTreeMap::new()), Err(DslError::NonFinite { .. })));
    }
}
