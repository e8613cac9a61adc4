//! CSV tables written by the estimators. Every table has a header row and a
//! row order fixed by its inputs; floats use the shortest round-trip form.

use std::io::Write;

use crate::error::{Error, Result};
use crate::limit_lab::{rectangles, GapReport, GridFunction, MeanDiagram, PbEstimate};

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush()?;
    Ok(())
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(std::io::Error::other(e))
    }
}

/// `model,q,s,t,n,trial,value` with rows ordered by estimate, pair, trial.
pub fn write_pb_density<W: Write>(w: W, model: &str, estimates: &[PbEstimate]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["model", "q", "s", "t", "n", "trial", "value"])?;
    for est in estimates {
        for (p, &(s, t)) in est.pairs.iter().enumerate() {
            for trial in 0..est.betti.len() {
                out.write_record([
                    model.to_string(),
                    est.q.to_string(),
                    s.to_string(),
                    t.to_string(),
                    est.n.to_string(),
                    trial.to_string(),
                    est.value(trial, p).to_string(),
                ])?;
            }
        }
    }
    finish(out)
}

/// `model,q,s,t,n,mean,std`: the per-window summary of a density sweep.
pub fn write_pb_summary<W: Write>(w: W, model: &str, estimates: &[PbEstimate]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["model", "q", "s", "t", "n", "mean", "std"])?;
    for est in estimates {
        for (p, &(s, t)) in est.pairs.iter().enumerate() {
            out.write_record([
                model.to_string(),
                est.q.to_string(),
                s.to_string(),
                t.to_string(),
                est.n.to_string(),
                est.mean[p].to_string(),
                est.std[p].to_string(),
            ])?;
        }
    }
    finish(out)
}

/// `l,i,j,count,normalized` in rectangle order. `count` is summed over trials.
pub fn write_histogram<W: Write>(w: W, mean: &MeanDiagram) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["l", "i", "j", "count", "normalized"])?;
    let l = mean.summed.l;
    for ((rect, count), norm) in rectangles(l).iter().zip(&mean.summed.counts).zip(mean.normalized()) {
        out.write_record([
            l.to_string(),
            rect.i.to_string(),
            rect.j.to_string(),
            count.to_string(),
            norm.to_string(),
        ])?;
    }
    finish(out)
}

/// `lambda_1,..,lambda_h,phi_hat,n,trials` in grid order.
pub fn write_mgf<W: Write>(w: W, phi: &GridFunction) -> Result<()> {
    let mut out = writer(w);
    let mut header: Vec<String> = (1..=phi.grid.dim()).map(|i| format!("lambda_{i}")).collect();
    header.extend(["phi_hat", "n", "trials"].map(String::from));
    out.write_record(&header)?;
    for (point, v) in phi.grid.points().zip(&phi.values) {
        let mut row: Vec<String> = point.iter().map(f64::to_string).collect();
        row.extend([v.to_string(), phi.meta.n.to_string(), phi.meta.trials.to_string()]);
        out.write_record(&row)?;
    }
    finish(out)
}

/// `x_1,..,x_h,phi_star` in grid order.
pub fn write_rate<W: Write>(w: W, star: &GridFunction) -> Result<()> {
    let mut out = writer(w);
    let mut header: Vec<String> = (1..=star.grid.dim()).map(|i| format!("x_{i}")).collect();
    header.push("phi_star".into());
    out.write_record(&header)?;
    for (point, v) in star.grid.points().zip(&star.values) {
        let mut row: Vec<String> = point.iter().map(f64::to_string).collect();
        row.push(v.to_string());
        out.write_record(&row)?;
    }
    finish(out)
}

/// `kind,k,r,m,n,h,measured,bound,pass`.
pub fn write_gaps<W: Write>(w: W, reports: &[GapReport]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["kind", "k", "r", "m", "n", "h", "measured", "bound", "pass"])?;
    for g in reports {
        out.write_record([
            g.kind.as_str().to_string(),
            g.k.to_string(),
            g.r.to_string(),
            g.m.to_string(),
            g.n.to_string(),
            g.h.to_string(),
            g.measured.to_string(),
            g.bound.to_string(),
            g.pass.to_string(),
        ])?;
    }
    finish(out)
}
