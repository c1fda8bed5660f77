//! Canonical text for terms. `parse ∘ format` is the identity on ASTs.

use num_rational::BigRational;
use num_traits::One;

use crate::calculus::Term;
use crate::fragments::{LoopGuard, StarExp};
use crate::kernel::{OpSyntax, STerm, Theory};

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn format_op(syntax: &OpSyntax) -> String {
    match syntax {
        OpSyntax::Join => "+".into(),
        OpSyntax::Mix(r) => format!("+[{}]", format_rational(r)),
        OpSyntax::Guard(names) => format!("?{{{}}}", names.join(",")),
    }
}

pub fn format_term<T: Theory>(theory: &T, t: &Term<T::Op>) -> String {
    let mut out = String::new();
    write_term(theory, t, &mut out);
    out
}

fn is_loose<O>(t: &Term<O>) -> bool {
    matches!(t, Term::Op(..) | Term::Beta(..) | Term::Mu(..))
}

fn write_wrapped<T: Theory>(theory: &T, t: &Term<T::Op>, out: &mut String) {
    if is_loose(t) {
        out.push('(');
        write_term(theory, t, out);
        out.push(')');
    } else {
        write_term(theory, t, out);
    }
}

fn write_term<T: Theory>(theory: &T, t: &Term<T::Op>, out: &mut String) {
    match t {
        Term::Ret(v) => out.push_str(v.as_str()),
        Term::Zero => out.push('0'),
        Term::Prefix(a, e) => {
            out.push_str(a.as_str());
            out.push('.');
            write_wrapped(theory, e, out);
        }
        Term::Op(o, args) => {
            assert_eq!(
                args.len(),
                2,
                "shipped theories only have binary operations"
            );
            write_wrapped(theory, &args[0], out);
            out.push(' ');
            out.push_str(&format_op(&theory.op_syntax(o)));
            out.push(' ');
            write_term(theory, &args[1], out);
        }
        Term::Beta(v, e) | Term::Mu(v, e) => {
            out.push_str(if matches!(t, Term::Mu(..)) {
                "mu "
            } else {
                "beta "
            });
            out.push_str(v.as_str());
            out.push_str(". ");
            write_term(theory, e, out);
        }
    }
}

pub fn format_sterm<T: Theory>(theory: &T, t: &STerm<T::Op, String>) -> String {
    let mut out = String::new();
    write_sterm(theory, t, &mut out);
    out
}

fn write_sterm<T: Theory>(theory: &T, t: &STerm<T::Op, String>, out: &mut String) {
    match t {
        STerm::Gen(g) => out.push_str(g),
        STerm::Zero => out.push('0'),
        STerm::Op(o, args) => {
            if matches!(args[0], STerm::Op(..)) {
                out.push('(');
                write_sterm(theory, &args[0], out);
                out.push(')');
            } else {
                write_sterm(theory, &args[0], out);
            }
            out.push(' ');
            out.push_str(&format_op(&theory.op_syntax(o)));
            out.push(' ');
            write_sterm(theory, &args[1], out);
        }
    }
}

pub fn format_star<T: Theory>(theory: &T, e: &StarExp<T::Op>) -> String {
    let mut out = String::new();
    write_star(theory, e, &mut out);
    out
}

fn write_star_paren<T: Theory>(theory: &T, e: &StarExp<T::Op>, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write_star(theory, e, out);
        out.push(')');
    } else {
        write_star(theory, e, out);
    }
}

fn write_star<T: Theory>(theory: &T, e: &StarExp<T::Op>, out: &mut String) {
    match e {
        StarExp::Zero => out.push('0'),
        StarExp::One => out.push('1'),
        StarExp::Act(a) => out.push_str(a.as_str()),
        StarExp::Const(v) => {
            out.push_str("ret ");
            out.push_str(v.as_str());
        }
        StarExp::Op(o, l, r) => {
            write_star_paren(theory, l, matches!(**l, StarExp::Op(..)), out);
            out.push(' ');
            out.push_str(&format_op(&theory.op_syntax(o)));
            out.push(' ');
            write_star(theory, r, out);
        }
        StarExp::Seq(l, r) => {
            write_star_paren(theory, l, matches!(**l, StarExp::Op(..)), out);
            out.push_str("; ");
            write_star_paren(
                theory,
                r,
                matches!(**r, StarExp::Op(..) | StarExp::Seq(..)),
                out,
            );
        }
        StarExp::Loop(body, guard) => {
            write_star_paren(
                theory,
                body,
                matches!(
                    **body,
                    StarExp::Op(..) | StarExp::Seq(..) | StarExp::Const(_)
                ),
                out,
            );
            out.push_str("*{");
            match guard {
                LoopGuard::Op(o) => out.push_str(&format_op(&theory.op_syntax(o))),
                LoopGuard::Poly(p) => {
                    out.push_str(&format_sterm(theory, &p.map_gens(&mut |g| g.to_string())))
                }
            }
            out.push('}');
        }
    }
}
