//! Expression trees for metric components and projection maps.
//!
//! Expressions are evaluated over any [`Scalar`], so the same tree yields
//! values, first derivatives and nested higher derivatives.

use std::fmt::Write as _;

use crate::dual::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    #[inline]
    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate by index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power, folded at parse time.
    Powi(Box<Expr>, i32),
    /// Constant real power.
    Powf(Box<Expr>, f64),
    /// General power `a^b` with non-constant exponent.
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        match self {
            Expr::Const(c) => S::from_f64(*c),
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Powi(a, n) => a.eval(vars).powi(*n),
            Expr::Powf(a, c) => a.eval(vars).powf(*c),
            Expr::Pow(a, b) => a.eval(vars).pow(b.eval(vars)),
            Expr::Call(f, a) => f.apply(a.eval(vars)),
        }
    }

    /// Evaluates a closed expression (no coordinates).
    pub fn eval_const(&self) -> Option<f64> {
        if self.max_var().is_some() {
            return None;
        }
        Some(self.eval::<f64>(&[]))
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut out = None;
        self.visit_vars(&mut |i| out = Some(out.map_or(i, |m: usize| m.max(i))));
        out
    }

    pub fn uses_var(&self, idx: usize) -> bool {
        let mut found = false;
        self.visit_vars(&mut |i| found |= i == idx);
        found
    }

    fn visit_vars(&self, f: &mut impl FnMut(usize)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => f(*i),
            Expr::Neg(a) | Expr::Powi(a, _) | Expr::Powf(a, _) | Expr::Call(_, a) => {
                a.visit_vars(f)
            }
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Renders the expression in the definition-file grammar. Parsing the
    /// output with the same names reproduces an equal tree.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.write(names, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Powi(..) | Expr::Powf(..) | Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn write_child(&self, child: &Expr, min_prec: u8, names: &[String], out: &mut String) {
        if child.precedence() < min_prec {
            out.push('(');
            child.write(names, out);
            out.push(')');
        } else {
            child.write(names, out);
        }
    }

    fn write(&self, names: &[String], out: &mut String) {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    let _ = write!(out, "-{:?}", -c);
                } else {
                    let _ = write!(out, "{c:?}");
                }
            }
            Expr::Var(i) => out.push_str(&names[*i]),
            Expr::Neg(a) => {
                out.push('-');
                self.write_child(a, 3, names, out);
            }
            Expr::Add(a, b) => {
                self.write_child(a, 1, names, out);
                out.push_str(" + ");
                self.write_child(b, 2, names, out);
            }
            Expr::Sub(a, b) => {
                self.write_child(a, 1, names, out);
                out.push_str(" - ");
                self.write_child(b, 2, names, out);
            }
            Expr::Mul(a, b) => {
                self.write_child(a, 2, names, out);
                out.push('*');
                self.write_child(b, 3, names, out);
            }
            Expr::Div(a, b) => {
                self.write_child(a, 2, names, out);
                out.push('/');
                self.write_child(b, 3, names, out);
            }
            Expr::Powi(a, n) => {
                self.write_child(a, 5, names, out);
                if *n < 0 {
                    let _ = write!(out, "^({n})");
                } else {
                    let _ = write!(out, "^{n}");
                }
            }
            Expr::Powf(a, c) => {
                self.write_child(a, 5, names, out);
                if c.is_sign_negative() {
                    let _ = write!(out, "^(-{:?})", -c);
                } else {
                    let _ = write!(out, "^{c:?}");
                }
            }
            Expr::Pow(a, b) => {
                self.write_child(a, 5, names, out);
                out.push('^');
                self.write_child(b, 4, names, out);
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(names, out);
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn evaluates_with_duals() {
        // sin(x)^2 * y
        let e = Expr::Mul(
            Box::new(Expr::Powi(Box::new(Expr::Call(Func::Sin, var(0))), 2)),
            var(1),
        );
        let x = [Dual::new(0.5, 1.0), Dual::new(2.0, 0.0)];
        let v = e.eval(&x);
        assert!((v.re - 0.5f64.sin().powi(2) * 2.0).abs() < 1e-15);
        assert!((v.eps - 2.0 * 0.5f64.sin() * 0.5f64.cos() * 2.0).abs() < 1e-15);
    }

    #[test]
    fn renders_with_minimal_parentheses() {
        let names = vec!["x".to_string(), "y".to_string()];
        let e = Expr::Sub(
            var(0),
            Box::new(Expr::Add(var(1), Box::new(Expr::Const(1.0)))),
        );
        assert_eq!(e.render(&names), "x - (y + 1.0)");
        let e = Expr::Neg(Box::new(Expr::Powi(var(0), 2)));
        assert_eq!(e.render(&names), "-x^2");
        let e = Expr::Powi(Box::new(Expr::Neg(var(0))), -2);
        assert_eq!(e.render(&names), "(-x)^(-2)");
    }
}
