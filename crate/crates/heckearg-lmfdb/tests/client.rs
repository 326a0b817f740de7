use std::cell::Cell;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::rc::Rc;
use std::time::{Duration, Instant};

use heckearg::hecke::{default_p_max, diagonalize, EigenBasis};
use heckearg::modsym::ManinSymbolSpace;
use heckearg_lmfdb::{
    cache_path, crosscheck, data_sanity, hecke_orbit_code, ClientConfig, IngestedForm, LmfdbClient, LmfdbError,
    Transport, TransportError,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Serves `fixture://newforms/<q>` and `fixture://embeddings/<code>` from disk.
struct FixtureTransport {
    calls: Rc<Cell<usize>>,
    failures_left: usize,
}

impl FixtureTransport {
    fn new(calls: Rc<Cell<usize>>) -> Self {
        Self { calls, failures_left: 0 }
    }
}

impl Transport for FixtureTransport {
    fn get(&mut self, url: &str) -> Result<String, TransportError> {
        self.calls.set(self.calls.get() + 1);
        if self.failures_left > 0 {
            self.failures_left -= 1;
            return Err(TransportError("503 service unavailable".into()));
        }
        let rest = url.strip_prefix("fixture://").ok_or_else(|| TransportError(format!("bad url {url}")))?;
        let (kind, key) = rest.split_once('/').unwrap();
        let file = fixtures().join(format!("{kind}_{key}.json"));
        std::fs::read_to_string(&file).map_err(|e| TransportError(format!("404 {}: {e}", file.display())))
    }
}

struct FailingTransport;

impl Transport for FailingTransport {
    fn get(&mut self, _url: &str) -> Result<String, TransportError> {
        Err(TransportError("connection refused".into()))
    }
}

struct CannedTransport(String);

impl Transport for CannedTransport {
    fn get(&mut self, _url: &str) -> Result<String, TransportError> {
        Ok(self.0.clone())
    }
}

fn fixture_config(cache: &Path) -> ClientConfig {
    ClientConfig {
        base_url: "fixture://".into(),
        newforms_template: "{base}newforms/{q}".into(),
        embeddings_template: "{base}embeddings/{code}".into(),
        cache_dir: cache.to_path_buf(),
        min_interval: Duration::from_millis(5),
        backoff: Duration::from_millis(1),
        ..ClientConfig::default()
    }
}

fn basis(q: u64) -> EigenBasis {
    diagonalize(&ManinSymbolSpace::build(q).unwrap(), default_p_max(q)).unwrap()
}

#[test]
fn orbit_codes() {
    assert_eq!(hecke_orbit_code("11.2.a.a").unwrap(), 11 + (2 << 24));
    assert_eq!(hecke_orbit_code("37.2.a.b").unwrap(), 37 + (2 << 24) + (1 << 52));
    assert_eq!(hecke_orbit_code("5.2.b.ba").unwrap(), 5 + (2 << 24) + (1 << 36) + (26 << 52));
    assert!(hecke_orbit_code("11.2.a").is_err());
    assert!(hecke_orbit_code("11.2.A.a").is_err());
}

#[test]
fn fetch_examples() {
    let dir = tempfile::tempdir().unwrap();
    let calls = Rc::new(Cell::new(0));
    let mut client = LmfdbClient::new(fixture_config(dir.path()), FixtureTransport::new(calls.clone()));
    let eleven = client.fetch_newforms(11).unwrap();
    assert_eq!(eleven.len(), 1);
    assert!((eleven[0].lambda_prime(2).unwrap() + 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(eleven[0].epsilon(), Some(1));
    assert_eq!(eleven[0].label, "11.2.a.a.1.1");
    assert_eq!(eleven[0].source_url, "fixture://embeddings/33554443");
    let thirty_seven = client.fetch_newforms(37).unwrap();
    assert_eq!(thirty_seven.len(), 2);
    assert_eq!(client.fetch_newforms(13).unwrap().len(), 0);
    let after = calls.get();
    assert_eq!(after, 2 + 3 + 1);
    client.fetch_newforms(37).unwrap();
    assert_eq!(calls.get(), after);
}

#[test]
fn cache_round_trip_and_offline() {
    let dir = tempfile::tempdir().unwrap();
    let calls = Rc::new(Cell::new(0));
    let mut online = LmfdbClient::new(fixture_config(dir.path()), FixtureTransport::new(calls.clone()));
    let fetched = online.fetch_newforms(37).unwrap();
    let bytes = std::fs::read(cache_path(dir.path(), 37)).unwrap();
    let mut offline =
        LmfdbClient::new(ClientConfig { offline: true, ..fixture_config(dir.path()) }, FailingTransport);
    let cached = offline.fetch_newforms(37).unwrap();
    assert_eq!(fetched, cached);
    let record = heckearg_lmfdb::LmfdbRecord::from_forms(37, &cached);
    assert_eq!(record.to_json().unwrap().into_bytes(), bytes);
    match offline.fetch_newforms(11) {
        Err(LmfdbError::NoCache(path)) => assert!(path.ends_with("q=11.json")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unreachable_without_cache_suggests_offline() {
    let dir = tempfile::tempdir().unwrap();
    let mut client = LmfdbClient::new(ClientConfig { retries: 2, ..fixture_config(dir.path()) }, FailingTransport);
    let err = client.fetch_newforms(11).unwrap_err();
    assert!(matches!(err, LmfdbError::Unreachable { .. }));
    assert!(err.to_string().contains("--offline"));
}

#[test]
fn retries_with_backoff_then_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let calls = Rc::new(Cell::new(0));
    let transport = FixtureTransport { calls: calls.clone(), failures_left: 2 };
    let mut client = LmfdbClient::new(fixture_config(dir.path()), transport);
    assert_eq!(client.fetch_newforms(11).unwrap().len(), 1);
    assert_eq!(calls.get(), 4);
}

#[test]
fn requests_are_spaced() {
    let dir = tempfile::tempdir().unwrap();
    let config = ClientConfig { min_interval: Duration::from_millis(60), ..fixture_config(dir.path()) };
    let mut client = LmfdbClient::new(config, FixtureTransport::new(Rc::new(Cell::new(0))));
    let start = Instant::now();
    client.fetch_newforms(37).unwrap();
    assert!(start.elapsed() >= Duration::from_millis(120));
}

#[test]
fn malformed_payload_reports_excerpt() {
    let dir = tempfile::tempdir().unwrap();
    let mut client =
        LmfdbClient::new(fixture_config(dir.path()), CannedTransport("<html>maintenance</html>".into()));
    match client.fetch_newforms(11) {
        Err(LmfdbError::Payload { excerpt, .. }) => assert!(excerpt.starts_with("<html>")),
        other => panic!("{other:?}"),
    }
    let mut client = LmfdbClient::new(fixture_config(dir.path()), CannedTransport("{\"rows\": []}".into()));
    assert!(matches!(client.fetch_newforms(11), Err(LmfdbError::Payload { .. })));
}

#[test]
fn crosscheck_against_computed_basis() {
    let dir = tempfile::tempdir().unwrap();
    let mut client = LmfdbClient::new(fixture_config(dir.path()), FixtureTransport::new(Rc::new(Cell::new(0))));
    for q in [11u64, 37] {
        let ingested = client.fetch_newforms(q).unwrap();
        let computed = basis(q);
        let report = crosscheck(&computed, &ingested, 97).unwrap();
        assert!(report.passed, "{report:?}");
        for pair in &report.pairs {
            let form = &computed.forms[pair.form_id];
            let ing = ingested.iter().find(|f| f.label == pair.label).unwrap();
            assert_eq!(Some(form.epsilon), ing.epsilon());
        }
        let sanity = data_sanity(q, &ingested).unwrap();
        assert!(sanity.deligne_excess <= 1e-6 && sanity.hecke_residual <= 1e-6, "{sanity:?}");
        let mut reversed: Vec<IngestedForm> = ingested.clone();
        reversed.reverse();
        assert_eq!(crosscheck(&computed, &reversed, 97).unwrap(), report);
    }
}

#[test]
fn crosscheck_detects_corruption_and_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let mut client = LmfdbClient::new(fixture_config(dir.path()), FixtureTransport::new(Rc::new(Cell::new(0))));
    let mut ingested = client.fetch_newforms(37).unwrap();
    let slot = ingested[1].lambda_p.iter().position(|e| e.0 == 13).unwrap();
    ingested[1].lambda_p[slot].1 += 1e-3;
    let report = crosscheck(&basis(37), &ingested, 97).unwrap();
    assert!(!report.passed);
    let bad = report.pairs.iter().find(|m| m.label == ingested[1].label).unwrap();
    assert_eq!(bad.worst_prime, 13);
    ingested.pop();
    assert!(matches!(crosscheck(&basis(37), &ingested, 97), Err(LmfdbError::CountMismatch { .. })));
}

/// One-shot HTTP server answering every request with the matching fixture file.
fn serve_fixtures(requests: usize) -> (String, std::thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                if header.trim().is_empty() {
                    break;
                }
            }
            let path = line.split_whitespace().nth(1).unwrap().trim_start_matches('/').replace('/', "_");
            let body = std::fs::read_to_string(fixtures().join(format!("{path}.json"))).unwrap();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                body.len(),
                body
            )
            .unwrap();
        }
    });
    (base, handle)
}

#[test]
fn http_transport_end_to_end() {
    let (base, handle) = serve_fixtures(2);
    let dir = tempfile::tempdir().unwrap();
    let config = ClientConfig {
        base_url: base,
        newforms_template: "{base}/newforms/{q}".into(),
        embeddings_template: "{base}/embeddings/{code}".into(),
        cache_dir: dir.path().to_path_buf(),
        min_interval: Duration::from_millis(5),
        ..ClientConfig::default()
    };
    let mut client = LmfdbClient::with_default_transport(config);
    let forms = client.fetch_newforms(11).unwrap();
    handle.join().unwrap();
    assert_eq!(forms.len(), 1);
    assert!((forms[0].lambda_prime(3).unwrap() + 1.0 / 3f64.sqrt()).abs() < 1e-12);
}
