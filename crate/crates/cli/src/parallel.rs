//! Envelope evaluation over a bounded pool of scoped threads.

use std::num::NonZeroUsize;
use std::thread;

use kernel_envelope::{BoundContext, BoundKind, Error, ErrorEnvelope, PointBound, PreparedBound, Sites};

use crate::error::Result;

pub fn workers() -> usize {
    thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

/// Same result as [`kernel_envelope::envelope`]; queries are split into
/// contiguous chunks and reassembled in order.
pub fn envelope(ctx: &BoundContext, kind: BoundKind, queries: &Sites) -> Result<ErrorEnvelope> {
    if queries.dim() != ctx.data.dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.data.dim(),
            found: queries.dim(),
        }
        .into());
    }
    let prepared = PreparedBound::new(ctx, kind)?;
    let points = evaluate(&prepared, queries, workers())?;
    Ok(ErrorEnvelope::from_points(kind, queries.clone(), &points))
}

pub fn evaluate(prepared: &PreparedBound, queries: &Sites, workers: usize) -> Result<Vec<PointBound>> {
    let n = queries.len();
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return Ok(queries
            .iter()
            .map(|x| prepared.eval(x))
            .collect::<kernel_envelope::Result<_>>()?);
    }
    let chunk = n.div_ceil(workers);
    let parts: Vec<kernel_envelope::Result<Vec<PointBound>>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w * chunk..((w + 1) * chunk).min(n))
                        .map(|i| prepared.eval(queries.point(i)))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut points = Vec::with_capacity(n);
    for part in parts {
        points.extend(part?);
    }
    Ok(points)
}
