use std::fmt;

/// Elementary functions accepted by the grammar. `Log` is the natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Log,
    Exp,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "log" => Some(Func::Log),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// A non-negative numeric literal. The source text is kept so that the
/// software float can re-read it at full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Number {
    pub value: f64,
    pub text: String,
}

impl Number {
    pub fn from_f64(value: f64) -> Number {
        debug_assert!(value.is_finite() && value >= 0.0);
        Number {
            value,
            text: format!("{value:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Number),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(value: f64) -> Expr {
        if value < 0.0 {
            Expr::Neg(Box::new(Expr::Num(Number::from_f64(-value))))
        } else {
            Expr::Num(Number::from_f64(value))
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    /// `true` when the expression does not depend on `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Replaces every occurrence of `t` with `with`.
    pub fn substitute(&self, with: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(with));
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Var => with.clone(),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Call(f, a) => Expr::Call(*f, s(a)),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Pow(a, b) => Expr::Pow(s(a), s(b)),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Num(n) => f.write_str(&n.text)?,
            Expr::Var => f.write_str("t")?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 3)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                f.write_str(")")?;
            }
            Expr::Add(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" + ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" - ")?;
                b.fmt_at(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str("*")?;
                b.fmt_at(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str("/")?;
                b.fmt_at(f, 3)?;
            }
            Expr::Pow(a, b) => {
                a.fmt_at(f, 5)?;
                f.write_str("^")?;
                b.fmt_at(f, 3)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Prints with the minimum parentheses needed to re-parse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
