/// Integrates the sawtooth `A(t) = t - g(t)` where `g(t)` is the generation time
/// of the freshest packet received by `t`. A virtual packet generated at time 0
/// is received at time 0, so the age starts at 0.
#[derive(Debug, Clone)]
pub struct AgeIntegrator {
    warmup: f64,
    horizon: f64,
    last_event_time: f64,
    max_gen_received: f64,
    area: f64,
    trace: Option<Vec<(f64, f64)>>,
}

impl AgeIntegrator {
    pub fn new(warmup: f64, horizon: f64, record_trace: bool) -> Self {
        let trace = record_trace.then(Vec::new);
        Self {
            warmup,
            horizon,
            last_event_time: 0.0,
            max_gen_received: 0.0,
            area: 0.0,
            trace,
        }
    }

    pub fn current_age(&self) -> f64 {
        self.last_event_time - self.max_gen_received
    }

    pub fn max_gen_received(&self) -> f64 {
        self.max_gen_received
    }

    /// Area under the age curve accumulated inside `[warmup, horizon]`.
    pub fn area(&self) -> f64 {
        self.area
    }

    fn advance(&mut self, t: f64) {
        if let Some(trace) = &mut self.trace {
            if trace.is_empty() && t >= self.warmup {
                trace.push((self.warmup, self.warmup - self.max_gen_received));
            }
        }
        let a = self.last_event_time.max(self.warmup);
        let b = t.min(self.horizon);
        if b > a {
            self.area += (b - a) * (0.5 * (a + b) - self.max_gen_received);
        }
        self.last_event_time = t;
    }

    /// Records a reception at `t` of a packet generated at `gen_time`.
    /// Returns whether the packet was informative.
    pub fn receive(&mut self, t: f64, gen_time: f64) -> bool {
        self.advance(t);
        if gen_time <= self.max_gen_received {
            return false;
        }
        let before = t - self.max_gen_received;
        self.max_gen_received = gen_time;
        if let Some(trace) = &mut self.trace {
            if t >= self.warmup && t <= self.horizon {
                trace.push((t, before));
                trace.push((t, t - gen_time));
            }
        }
        true
    }

    /// Closes the integral at the horizon and returns the recorded trace, if any.
    pub fn finish(&mut self) -> Option<Vec<(f64, f64)>> {
        self.advance(self.horizon);
        let end = (self.horizon, self.current_age());
        self.trace.take().map(|mut trace| {
            trace.push(end);
            trace
        })
    }
}

/// Area under a piecewise-linear trace by the trapezoid rule.
pub fn trace_area(trace: &[(f64, f64)]) -> f64 {
    trace
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}

/// Keeps at most `points` breakpoints, always including the first and last.
pub fn downsample(trace: &[(f64, f64)], points: usize) -> Vec<(f64, f64)> {
    if trace.len() <= points || points == 0 {
        return trace.to_vec();
    }
    if points == 1 {
        return vec![trace[0]];
    }
    let last = trace.len() - 1;
    (0..points).map(|k| trace[(k * last) / (points - 1)]).collect()
}
