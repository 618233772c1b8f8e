//! Fully connected networks with reverse-mode gradients, f64 throughout.

use std::fmt::Write as _;

use rand::Rng;

use super::LearnerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputActivation {
    Tanh,
    Identity,
}

impl OutputActivation {
    fn as_str(self) -> &'static str {
        match self {
            OutputActivation::Tanh => "tanh",
            OutputActivation::Identity => "identity",
        }
    }
}

/// ReLU hidden layers; weights of layer `l` stored input-major
/// (`in x out`, row-major) followed by its biases, all in one flat vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    params: Vec<f64>,
    output: OutputActivation,
}

/// Layer outputs kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct Tape {
    batch: usize,
    /// `acts[0]` is the input, `acts[l + 1]` the activated output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("tape has input")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Result<Self, LearnerError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(LearnerError::Shape(format!(
                "invalid layer sizes {sizes:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for w in sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Ok(Self {
            sizes: sizes.to_vec(),
            offsets,
            params: vec![0.0; total],
            output,
        })
    }

    /// Uniform initialization in `±1/sqrt(fan_in)` for weights and biases.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        output: OutputActivation,
        rng: &mut R,
    ) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(sizes, output)?;
        for l in 0..net.layers() {
            let bound = 1.0 / (sizes[l] as f64).sqrt();
            let (a, b) = (net.offsets[l], net.offsets[l + 1]);
            for p in &mut net.params[a..b] {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("sizes nonempty")
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn weights(&self, l: usize) -> &[f64] {
        let a = self.offsets[l];
        &self.params[a..a + self.sizes[l] * self.sizes[l + 1]]
    }

    fn biases(&self, l: usize) -> &[f64] {
        let a = self.offsets[l] + self.sizes[l] * self.sizes[l + 1];
        &self.params[a..a + self.sizes[l + 1]]
    }

    /// Forward pass over `input`, a row-major batch of `input_size` columns.
    pub fn forward_tape(&self, input: &[f64]) -> Result<Tape, LearnerError> {
        let n_in = self.input_size();
        if input.is_empty() || input.len() % n_in != 0 {
            return Err(LearnerError::Shape(format!(
                "input of length {} is not a batch of {n_in}-vectors",
                input.len()
            )));
        }
        let batch = input.len() / n_in;
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for l in 0..self.layers() {
            let (k, m) = (self.sizes[l], self.sizes[l + 1]);
            let mut z = Vec::with_capacity(batch * m);
            for _ in 0..batch {
                z.extend_from_slice(self.biases(l));
            }
            gemm(
                batch,
                k,
                m,
                &acts[l],
                false,
                self.weights(l),
                false,
                &mut z,
                true,
            );
            if l + 1 < self.layers() {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            } else if self.output == OutputActivation::Tanh {
                for v in &mut z {
                    *v = v.tanh();
                }
            }
            acts.push(z);
        }
        Ok(Tape { batch, acts })
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, LearnerError> {
        Ok(self
            .forward_tape(input)?
            .acts
            .pop()
            .expect("tape has output"))
    }

    /// Gradients of `sum(grad_output . output)` with respect to the
    /// parameters and to the input batch.
    pub fn backward(
        &self,
        tape: &Tape,
        grad_output: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), LearnerError> {
        let batch = tape.batch;
        if grad_output.len() != batch * self.output_size() {
            return Err(LearnerError::Shape(format!(
                "output gradient of length {} for batch {batch} x {}",
                grad_output.len(),
                self.output_size()
            )));
        }
        let mut grads = vec![0.0; self.params.len()];
        let mut delta = grad_output.to_vec();
        let last = self.layers() - 1;
        for l in (0..self.layers()).rev() {
            let (k, m) = (self.sizes[l], self.sizes[l + 1]);
            let out = &tape.acts[l + 1];
            if l == last {
                if self.output == OutputActivation::Tanh {
                    for (d, y) in delta.iter_mut().zip(out) {
                        *d *= 1.0 - y * y;
                    }
                }
            } else {
                for (d, y) in delta.iter_mut().zip(out) {
                    if *y <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let w_off = self.offsets[l];
            let b_off = w_off + k * m;
            // dW = A^T delta
            gemm(
                k,
                batch,
                m,
                &tape.acts[l],
                true,
                &delta,
                false,
                &mut grads[w_off..b_off],
                false,
            );
            let db = &mut grads[b_off..b_off + m];
            for row in delta.chunks_exact(m) {
                for (g, d) in db.iter_mut().zip(row) {
                    *g += d;
                }
            }
            // dA = delta W^T
            let mut prev = vec![0.0; batch * k];
            gemm(
                batch,
                m,
                k,
                &delta,
                false,
                self.weights(l),
                true,
                &mut prev,
                false,
            );
            delta = prev;
        }
        Ok((grads, delta))
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// `target <- tau * self + (1 - tau) * target`.
    pub fn soft_update_into(&self, target: &mut Mlp, tau: f64) {
        debug_assert_eq!(self.sizes, target.sizes);
        if tau == 1.0 {
            target.params.copy_from_slice(&self.params);
            return;
        }
        for (t, s) in target.params.iter_mut().zip(&self.params) {
            *t += tau * (s - *t);
        }
    }

    /// Plain-text snapshot; parameters carry 17 significant digits, which
    /// round-trips every f64 exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::from("racelab-mlp 1\n");
        let sizes: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "sizes {}", sizes.join(" "));
        let _ = writeln!(out, "output {}", self.output.as_str());
        for p in &self.params {
            let _ = writeln!(out, "{p:.16e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LearnerError> {
        let bad = |m: &str| LearnerError::Snapshot(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("racelab-mlp 1") {
            return Err(bad("missing `racelab-mlp 1` header"));
        }
        let sizes: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("sizes "))
            .ok_or_else(|| bad("missing sizes line"))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("bad layer size")))
            .collect::<Result<_, _>>()?;
        let output = match lines.next().and_then(|l| l.strip_prefix("output ")) {
            Some("tanh") => OutputActivation::Tanh,
            Some("identity") => OutputActivation::Identity,
            _ => return Err(bad("missing or unknown output activation")),
        };
        let mut net = Self::zeros(&sizes, output)?;
        let params: Vec<f64> = lines
            .map(|l| l.parse().map_err(|_| bad(&format!("bad parameter `{l}`"))))
            .collect::<Result<_, _>>()?;
        if params.len() != net.params.len() {
            return Err(bad(&format!(
                "expected {} parameters, found {}",
                net.params.len(),
                params.len()
            )));
        }
        net.params = params;
        Ok(net)
    }
}

/// `C (m x n) = [C +] op(A) (m x k) * op(B) (k x n)`, all row-major; a
/// transposed operand is stored as its transpose.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t {
        (1, m as isize)
    } else {
        (k as isize, 1)
    };
    let (rsb, csb) = if b_t {
        (1, k as isize)
    } else {
        (n as isize, 1)
    };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the asserted lengths cover every index the strides reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
