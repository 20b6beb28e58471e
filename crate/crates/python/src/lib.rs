//! Python bindings: thin wrappers over the core crate. States and labels
//! cross the boundary as plain integers, messages as lists of labels, and
//! analysis results as the same JSON documents the CLI prints.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cbc_chaos as core;
use cbc_chaos::{
    Block, BlockSize, Configuration, ConnectivityMode, KeyedPermutation, MessageSemantics,
    MessageSeq, PhasePoint, TransitionGraph,
};

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_semantics(s: &str) -> PyResult<MessageSemantics> {
    s.parse().map_err(|_| {
        PyValueError::new_err(format!(
            "unknown semantics '{s}': expected bit-index, full-block or xor"
        ))
    })
}

fn parse_mode(s: &str) -> PyResult<ConnectivityMode> {
    match s {
        "implicit" => Ok(ConnectivityMode::Implicit),
        "explicit" => Ok(ConnectivityMode::Explicit),
        other => Err(PyValueError::new_err(format!(
            "unknown mode '{other}': expected implicit or explicit"
        ))),
    }
}

fn json_string<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("documents serialize")
}

/// A keyed permutation (block cipher) over n-bit blocks.
#[pyclass(frozen, skip_from_py_object)]
struct Cipher {
    inner: KeyedPermutation,
}

impl Cipher {
    fn block(&self, value: u64) -> PyResult<Block> {
        Block::new(value, self.inner.block_size()).map_err(err)
    }

    fn point(&self, state: u64, labels: Vec<u64>, semantics: MessageSemantics) -> PyResult<PhasePoint> {
        Ok(PhasePoint::new(
            self.block(state)?,
            MessageSeq::new(labels, semantics, self.inner.block_size()).map_err(err)?,
        ))
    }
}

#[pymethods]
impl Cipher {
    #[staticmethod]
    fn identity(n: u8) -> PyResult<Self> {
        let size = BlockSize::new(n).map_err(err)?;
        Ok(Cipher { inner: KeyedPermutation::identity(size) })
    }

    #[staticmethod]
    fn negation(n: u8) -> PyResult<Self> {
        let size = BlockSize::new(n).map_err(err)?;
        Ok(Cipher { inner: KeyedPermutation::negation(size) })
    }

    #[staticmethod]
    fn caesar(n: u8, shift: i64) -> PyResult<Self> {
        let size = BlockSize::new(n).map_err(err)?;
        Ok(Cipher { inner: KeyedPermutation::caesar(size, shift) })
    }

    #[staticmethod]
    fn table(n: u8, forward: Vec<u64>) -> PyResult<Self> {
        let size = BlockSize::new(n).map_err(err)?;
        Ok(Cipher { inner: KeyedPermutation::table(size, forward).map_err(err)? })
    }

    /// Parse `identity`, `negation`, `caesar:<k>` or `table:<path>`.
    #[staticmethod]
    fn from_spec(spec: &str, n: u8) -> PyResult<Self> {
        let size = BlockSize::new(n).map_err(err)?;
        Ok(Cipher { inner: KeyedPermutation::parse_spec(spec, size).map_err(err)? })
    }

    fn encrypt(&self, x: u64) -> PyResult<u64> {
        Ok(self.inner.encrypt(self.block(x)?).value())
    }

    fn decrypt(&self, y: u64) -> PyResult<u64> {
        Ok(self.inner.decrypt(self.block(y)?).value())
    }

    fn block_size(&self) -> u8 {
        self.inner.block_size().bits()
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }

    /// Round-trip bijectivity check: (passed, exhaustive, checked, violations).
    fn validate(&self) -> (bool, bool, u64, Vec<u64>) {
        let report = core::validate_bijection(&self.inner);
        (report.passed, report.exhaustive, report.checked, report.violations)
    }

    fn __repr__(&self) -> String {
        format!(
            "Cipher({}, n={})",
            self.inner.descriptor(),
            self.inner.block_size().bits()
        )
    }
}

/// Combine a message label into a state without encrypting.
#[pyfunction]
#[pyo3(signature = (n, x, label, semantics = "bit-index"))]
fn apply_label(n: u8, x: u64, label: u64, semantics: &str) -> PyResult<u64> {
    let size = BlockSize::new(n).map_err(err)?;
    let block = Block::new(x, size).map_err(err)?;
    Ok(core::apply_label(block, label, parse_semantics(semantics)?)
        .map_err(err)?
        .value())
}

/// One transition: absorb the label, then encrypt.
#[pyfunction]
#[pyo3(signature = (cipher, x, label, semantics = "bit-index"))]
fn step(cipher: &Cipher, x: u64, label: u64, semantics: &str) -> PyResult<u64> {
    Ok(
        core::step_state(&cipher.inner, cipher.block(x)?, label, parse_semantics(semantics)?)
            .map_err(err)?
            .value(),
    )
}

/// Iterate from `iv` consuming `labels` (zero-extended past the end when
/// `steps` asks for more). Returns (states, ciphertext_blocks, tail_zeros).
#[pyfunction]
#[pyo3(signature = (cipher, iv, labels, steps = None, semantics = "bit-index"))]
fn simulate(
    cipher: &Cipher,
    iv: u64,
    labels: Vec<u64>,
    steps: Option<usize>,
    semantics: &str,
) -> PyResult<(Vec<u64>, Vec<u64>, usize)> {
    let semantics = parse_semantics(semantics)?;
    let steps = steps.unwrap_or(labels.len());
    let start = cipher.point(iv, labels, semantics)?;
    let t = core::trajectory(&cipher.inner, &start, steps, semantics).map_err(err)?;
    Ok((
        t.points.iter().map(|p| p.state.value()).collect(),
        t.ciphertext_blocks.iter().map(|b| b.value()).collect(),
        t.tail_zeros_consumed,
    ))
}

/// Exact distance between two phase points, as a truncated decimal string.
#[pyfunction]
#[pyo3(signature = (n, x, y, semantics = "bit-index", digits = 12))]
fn distance_decimal(
    n: u8,
    x: (u64, Vec<u64>),
    y: (u64, Vec<u64>),
    semantics: &str,
    digits: usize,
) -> PyResult<String> {
    let size = BlockSize::new(n).map_err(err)?;
    let semantics = parse_semantics(semantics)?;
    let px = PhasePoint::new(
        Block::new(x.0, size).map_err(err)?,
        MessageSeq::new(x.1, semantics, size).map_err(err)?,
    );
    let py = PhasePoint::new(
        Block::new(y.0, size).map_err(err)?,
        MessageSeq::new(y.1, semantics, size).map_err(err)?,
    );
    Ok(core::distance(&px, &py).map_err(err)?.to_decimal_string(digits))
}

/// Exact test d(x, y) < 10^(-q).
#[pyfunction]
#[pyo3(signature = (n, x, y, q, semantics = "bit-index"))]
fn distance_less_than_pow10(
    n: u8,
    x: (u64, Vec<u64>),
    y: (u64, Vec<u64>),
    q: u32,
    semantics: &str,
) -> PyResult<bool> {
    let size = BlockSize::new(n).map_err(err)?;
    let semantics = parse_semantics(semantics)?;
    let px = PhasePoint::new(
        Block::new(x.0, size).map_err(err)?,
        MessageSeq::new(x.1, semantics, size).map_err(err)?,
    );
    let py = PhasePoint::new(
        Block::new(y.0, size).map_err(err)?,
        MessageSeq::new(y.1, semantics, size).map_err(err)?,
    );
    Ok(core::distance(&px, &py).map_err(err)?.less_than_pow10(q))
}

/// Reference CBC encryption over whole blocks.
#[pyfunction]
fn cbc_encrypt(cipher: &Cipher, iv: u64, blocks: Vec<u64>) -> PyResult<Vec<u64>> {
    let iv = cipher.block(iv)?;
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|v| cipher.block(v))
        .collect::<PyResult<_>>()?;
    Ok(core::cbc_encrypt(&cipher.inner, iv, &blocks)
        .map_err(err)?
        .iter()
        .map(|b| b.value())
        .collect())
}

/// Reference CBC decryption over whole blocks.
#[pyfunction]
fn cbc_decrypt(cipher: &Cipher, iv: u64, blocks: Vec<u64>) -> PyResult<Vec<u64>> {
    let iv = cipher.block(iv)?;
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|v| cipher.block(v))
        .collect::<PyResult<_>>()?;
    Ok(core::cbc_decrypt(&cipher.inner, iv, &blocks)
        .map_err(err)?
        .iter()
        .map(|b| b.value())
        .collect())
}

/// Append a 1 bit plus zeros up to the block boundary and split into blocks.
#[pyfunction]
fn pad_bits(bits: &str, n: u8) -> PyResult<Vec<u64>> {
    let size = BlockSize::new(n).map_err(err)?;
    let bits: core::Bits = bits.parse().map_err(err)?;
    Ok(core::pad(&bits, size).iter().map(|b| b.value()).collect())
}

/// Inverse of `pad_bits`; returns the original bit string.
#[pyfunction]
fn unpad_bits(blocks: Vec<u64>, n: u8) -> PyResult<String> {
    let size = BlockSize::new(n).map_err(err)?;
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|v| Block::new(v, size).map_err(err))
        .collect::<PyResult<_>>()?;
    Ok(core::unpad(&blocks).map_err(err)?.to_string())
}

/// Outgoing edges of a state: list of (label, successor).
#[pyfunction]
#[pyo3(signature = (cipher, x, semantics = "bit-index"))]
fn successors(cipher: &Cipher, x: u64, semantics: &str) -> PyResult<Vec<(u64, u64)>> {
    let graph = TransitionGraph::new(&cipher.inner, parse_semantics(semantics)?);
    Ok(graph
        .successors(cipher.block(x)?)
        .into_iter()
        .map(|(m, y)| (m, y.value()))
        .collect())
}

/// Incoming edges of a state: list of (label, predecessor).
#[pyfunction]
#[pyo3(signature = (cipher, y, semantics = "bit-index"))]
fn predecessors(cipher: &Cipher, y: u64, semantics: &str) -> PyResult<Vec<(u64, u64)>> {
    let graph = TransitionGraph::new(&cipher.inner, parse_semantics(semantics)?);
    Ok(graph
        .predecessors(cipher.block(y)?)
        .into_iter()
        .map(|(m, x)| (m, x.value()))
        .collect())
}

/// Shortest label sequence steering `from_state` to `to_state`, or None.
#[pyfunction]
#[pyo3(signature = (cipher, from_state, to_state, semantics = "bit-index"))]
fn find_path(
    cipher: &Cipher,
    from_state: u64,
    to_state: u64,
    semantics: &str,
) -> PyResult<Option<Vec<u64>>> {
    let graph = TransitionGraph::new(&cipher.inner, parse_semantics(semantics)?);
    Ok(graph.find_path(cipher.block(from_state)?, cipher.block(to_state)?))
}

/// Strong-connectivity verdict as a JSON document (same shape as the CLI).
#[pyfunction]
#[pyo3(signature = (cipher, semantics = "bit-index", mode = "implicit"))]
fn analyze_json(cipher: &Cipher, semantics: &str, mode: &str) -> PyResult<String> {
    let semantics = parse_semantics(semantics)?;
    let verdict =
        core::chaos_verdict(&cipher.inner, semantics, parse_mode(mode)?).map_err(err)?;
    let mut doc = serde_json::json!({
        "n": verdict.configuration.n,
        "cipher": verdict.configuration.cipher,
        "semantics": verdict.configuration.semantics,
        "strongly_connected": verdict.connectivity.strongly_connected,
        "status": verdict.status.as_str(),
    });
    if let Some(witness) = verdict.connectivity.witness {
        doc["witness"] = serde_json::json!({
            "from": witness.from,
            "to": witness.to,
            "forward_reachable": witness.forward_reachable,
        });
    }
    if let Some(scc) = verdict.connectivity.scc_count {
        doc["scc_count"] = serde_json::json!(scc);
    }
    Ok(doc.to_string())
}

/// CSV edge table (x, m, F, g columns plus binary renderings).
#[pyfunction]
#[pyo3(signature = (cipher, semantics = "bit-index"))]
fn edge_table_csv(cipher: &Cipher, semantics: &str) -> PyResult<String> {
    let graph = TransitionGraph::new(&cipher.inner, parse_semantics(semantics)?);
    core::edge_table_csv(&graph).map_err(err)
}

/// DOT rendering of the transition graph.
#[pyfunction]
#[pyo3(signature = (cipher, semantics = "bit-index"))]
fn export_dot(cipher: &Cipher, semantics: &str) -> PyResult<String> {
    let graph = TransitionGraph::new(&cipher.inner, parse_semantics(semantics)?);
    core::export_dot(&graph).map_err(err)
}

/// Run a witness construction, turning a disconnected graph into its own
/// JSON certificate rather than an exception.
fn witness_json<T: serde::Serialize>(
    result: core::Result<T>,
    configuration: Configuration,
) -> PyResult<String> {
    match result {
        Ok(doc) => Ok(json_string(&doc)),
        Err(core::Error::NotStronglyConnected { from, to, forward_reachable, vertex_count }) => {
            Ok(json_string(&core::chaos::unreachable_pair_document(
                configuration,
                from,
                to,
                forward_reachable,
                vertex_count,
            )))
        }
        Err(e) => Err(err(e)),
    }
}

/// Periodic-point witness document for an anchor within 10^(-q).
#[pyfunction]
#[pyo3(signature = (cipher, state, labels, q, semantics = "bit-index"))]
fn periodic_witness_json(
    cipher: &Cipher,
    state: u64,
    labels: Vec<u64>,
    q: u32,
    semantics: &str,
) -> PyResult<String> {
    let semantics = parse_semantics(semantics)?;
    let anchor = cipher.point(state, labels, semantics)?;
    let configuration = Configuration::of(&cipher.inner, semantics);
    witness_json(
        core::periodic_witness(&cipher.inner, semantics, &anchor, q)
            .map(|w| w.to_document(configuration.clone())),
        configuration,
    )
}

/// Transitive witness document: from the 10^(-q) ball around the source,
/// an orbit that lands exactly on the target.
#[pyfunction]
#[pyo3(signature = (cipher, from_state, from_labels, to_state, to_labels, q, semantics = "bit-index"))]
#[allow(clippy::too_many_arguments)]
fn transitive_witness_json(
    cipher: &Cipher,
    from_state: u64,
    from_labels: Vec<u64>,
    to_state: u64,
    to_labels: Vec<u64>,
    q: u32,
    semantics: &str,
) -> PyResult<String> {
    let semantics = parse_semantics(semantics)?;
    let from = cipher.point(from_state, from_labels, semantics)?;
    let to = cipher.point(to_state, to_labels, semantics)?;
    let configuration = Configuration::of(&cipher.inner, semantics);
    witness_json(
        core::transitive_witness(&cipher.inner, semantics, &from, &to, q)
            .map(|w| w.to_document(configuration.clone())),
        configuration,
    )
}

/// Sensitivity certificate document (delta = 1) for an anchor.
#[pyfunction]
#[pyo3(signature = (cipher, state, labels, q, semantics = "bit-index"))]
fn sensitivity_json(
    cipher: &Cipher,
    state: u64,
    labels: Vec<u64>,
    q: u32,
    semantics: &str,
) -> PyResult<String> {
    let semantics = parse_semantics(semantics)?;
    let anchor = cipher.point(state, labels, semantics)?;
    let configuration = Configuration::of(&cipher.inner, semantics);
    let verdict = core::chaos_verdict(&cipher.inner, semantics, ConnectivityMode::Implicit)
        .map_err(err)?;
    witness_json(
        core::sensitivity_certificate(&cipher.inner, semantics, &anchor, q)
            .map(|c| c.to_document(configuration.clone(), verdict.status)),
        configuration,
    )
}

/// Compare the xor-semantics trajectory against reference CBC output:
/// (applicable, ran, equal, first_divergence).
#[pyfunction]
#[pyo3(signature = (cipher, iv, blocks, semantics = "xor"))]
fn verify_cbc_equivalence(
    cipher: &Cipher,
    iv: u64,
    blocks: Vec<u64>,
    semantics: &str,
) -> PyResult<(bool, bool, bool, Option<usize>)> {
    let iv = cipher.block(iv)?;
    let blocks: Vec<Block> = blocks
        .into_iter()
        .map(|v| cipher.block(v))
        .collect::<PyResult<_>>()?;
    let report =
        core::verify_cbc_equivalence(&cipher.inner, iv, &blocks, parse_semantics(semantics)?)
            .map_err(err)?;
    Ok((report.applicable, report.ran, report.equal, report.first_divergence))
}

#[pymodule]
fn cbc_chaos_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Cipher>()?;
    m.add_function(wrap_pyfunction!(apply_label, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(distance_decimal, m)?)?;
    m.add_function(wrap_pyfunction!(distance_less_than_pow10, m)?)?;
    m.add_function(wrap_pyfunction!(cbc_encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(cbc_decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(pad_bits, m)?)?;
    m.add_function(wrap_pyfunction!(unpad_bits, m)?)?;
    m.add_function(wrap_pyfunction!(successors, m)?)?;
    m.add_function(wrap_pyfunction!(predecessors, m)?)?;
    m.add_function(wrap_pyfunction!(find_path, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_json, m)?)?;
    m.add_function(wrap_pyfunction!(edge_table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(export_dot, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_witness_json, m)?)?;
    m.add_function(wrap_pyfunction!(transitive_witness_json, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity_json, m)?)?;
    m.add_function(wrap_pyfunction!(verify_cbc_equivalence, m)?)?;
    Ok(())
}
