//! One-shot harmonic value report over a scenario's initial holdings.

use std::fmt::Write;

use harmonia_core::calculus::rank_compositions;
use harmonia_core::transform::SystemView;

use crate::scenario::{holdings, Scenario};

pub fn hv_report(sc: &Scenario) -> String {
    let mut out = String::new();
    for sys in &sc.systems {
        let comps = holdings(sys);
        for ctx_id in &sys.contexts {
            let Some(ctx) = sc.context(ctx_id) else { continue };
            let view = SystemView {
                expression: &sys.expression,
                context: ctx,
                compositions: &comps,
            };
            let _ = writeln!(
                out,
                "system {} context {} expression {}: state {:.6}",
                sys.id,
                ctx.id,
                sys.expression.id,
                view.state()
            );
            for (rank, s) in rank_compositions(&comps, &sys.expression, ctx).iter().enumerate() {
                let mark = if rank < ctx.selection_size { '*' } else { ' ' };
                let _ = writeln!(
                    out,
                    "  {mark} {:<16} hv {:>9.6}  matched {}/{}  significance {:>9.6} ({}/{})",
                    s.id, s.hv.value, s.hv.matched, s.hv.n, s.significance.value, s.significance.n_conforming, s.significance.m
                );
            }
        }
    }
    out
}
