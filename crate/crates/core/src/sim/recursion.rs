//! Event-free average age for the single-server LCFS queue with preemption.
//!
//! Packet `i` is informative exactly when it finishes before packet `i + 1` is
//! generated (`S_i < X_i`). With `B_i` the time from the last informative
//! generation to `t_i`,
//!
//! ```text
//! B_{i+1} = X_i + B_i * (1 - 1{S_i < X_i})
//! area over [t_i, t_{i+1}) = X_i^2 / 2 + B_i * min(S_i, X_i)
//! ```
//!
//! Draws are consumed in the simulator's order (`X_1`, then `S_i, X_{i+1}` per
//! packet), so both computations can be fed the same stream.

use crate::draws::DrawSource;

/// Time-average age over the generation gaps that start at or after `warmup`
/// and end by `horizon`. The first gap (from the virtual packet at time 0) is
/// included only when `warmup` is 0.
pub fn lcfsp_recursion_age<D: DrawSource>(mut draws: D, horizon: f64, warmup: f64) -> f64 {
    let mut t = draws.next_interarrival();
    let mut b = t;
    let (mut area, mut span) = if warmup <= 0.0 && t <= horizon {
        (0.5 * t * t, t)
    } else {
        (0.0, 0.0)
    };
    loop {
        let s = draws.next_service();
        let x = draws.next_interarrival();
        let next = t + x;
        if next > horizon {
            break;
        }
        if t >= warmup {
            area += 0.5 * x * x + b * s.min(x);
            span += x;
        }
        b = if s < x { x } else { x + b };
        t = next;
    }
    if span > 0.0 {
        area / span
    } else {
        f64::NAN
    }
}
