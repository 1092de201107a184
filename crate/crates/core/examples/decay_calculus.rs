//! The chain h → r → p → q for linear and cubic feedback, and the comparison envelopes.

use dampwave::decay::{build_chain, closed_form_envelope, construct_h, solve_envelope, ClosedForm};
use dampwave::dynamics::{make_feedback, FeedbackKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let meas_sigma = 4.0 * std::f64::consts::PI;
    for kind in [FeedbackKind::Linear { slope: 1.0 }, FeedbackKind::Power { exponent: 3.0 }] {
        let g = make_feedback(kind)?;
        let h = construct_h(&g)?;
        let chain = build_chain(h, meas_sigma, 1.0, g.k0(), 1.0)?;
        let env = solve_envelope(&chain.q, 1.0, 20.0, 1e-3)?;
        println!("# {kind}: c = {:.4e}, K0 = {}", chain.c, chain.k0);
        println!("x,p(x),q(x)");
        for x in [1e-3, 1e-2, 0.1, 1.0] {
            println!("{x},{:.6e},{:.6e}", chain.p.eval(x), chain.q.eval(x));
        }
        println!("S(5) = {:.6e}, S(20) = {:.6e}", env.at(5.0), env.at(20.0));
    }

    // cubic feedback: the polynomial form solves S' = −2 S², i.e. 1/(1 + 2t) from E0 = 1
    let poly = closed_form_envelope(ClosedForm::new_polynomial(1.0, 3.0)?, 1.0)?;
    let q = dampwave::decay::MonotoneFn::Power { coef: 2.0, exponent: 2.0 };
    let s = solve_envelope(&q, 1.0, 4.0, 1e-3)?;
    for t in [1.0, 2.0, 4.0] {
        println!("t = {t}: ODE {:.10}, closed form {:.10}", s.at(t), poly(t));
    }
    Ok(())
}
