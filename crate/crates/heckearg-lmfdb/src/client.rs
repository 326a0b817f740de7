use std::path::PathBuf;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde_json::Value;

use crate::record::{cache_path, hecke_orbit_code, IngestedForm, LmfdbRecord};
use crate::{LmfdbError, Result};

#[derive(Debug, Clone, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport {
    fn get(&mut self, url: &str) -> std::result::Result<String, TransportError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder().timeout_global(Some(timeout)).build();
        Self { agent: ureq::Agent::new_with_config(config) }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for UreqTransport {
    fn get(&mut self, url: &str) -> std::result::Result<String, TransportError> {
        let mut response = self.agent.get(url).call().map_err(|e| TransportError(e.to_string()))?;
        response.body_mut().read_to_string().map_err(|e| TransportError(e.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    /// Placeholders: {base}, {q}.
    pub newforms_template: String,
    /// Placeholders: {base}, {code}.
    pub embeddings_template: String,
    pub cache_dir: PathBuf,
    pub offline: bool,
    pub min_interval: Duration,
    pub retries: u32,
    pub backoff: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        Self {
            base_url: "https://www.lmfdb.org".into(),
            newforms_template: "{base}/api/mf_newforms/?level={q}&weight=2&char_order=1&_format=json&_fields=label,dim"
                .into(),
            embeddings_template:
                "{base}/api/mf_hecke_cc/?hecke_orbit_code={code}&_format=json&_fields=lfunction_label,embedding_index,an_normalized"
                    .into(),
            cache_dir: PathBuf::from("cache"),
            offline: false,
            min_interval: Duration::from_millis(500),
            retries: 3,
            backoff: Duration::from_secs(1),
        }
    }
}

pub struct LmfdbClient<T: Transport> {
    config: ClientConfig,
    transport: T,
    last_request: Option<Instant>,
}

fn excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

fn payload_error(url: &str, body: &str, detail: impl Into<String>) -> LmfdbError {
    LmfdbError::Payload { url: url.to_string(), detail: detail.into(), excerpt: excerpt(body) }
}

fn data_rows<'a>(url: &str, body: &str, json: &'a Value) -> Result<&'a Vec<Value>> {
    json.get("data").and_then(Value::as_array).ok_or_else(|| payload_error(url, body, "no \"data\" array"))
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl LmfdbClient<UreqTransport> {
    pub fn with_default_transport(config: ClientConfig) -> Self {
        Self::new(config, UreqTransport::default())
    }
}

impl<T: Transport> LmfdbClient<T> {
    pub fn new(config: ClientConfig, transport: T) -> Self {
        Self { config, transport, last_request: None }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn throttled_get(&mut self, url: &str) -> std::result::Result<String, TransportError> {
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            if let Some(last) = self.last_request {
                let since = last.elapsed();
                if since < self.config.min_interval {
                    std::thread::sleep(self.config.min_interval - since);
                }
            }
            self.last_request = Some(Instant::now());
            match self.transport.get(url) {
                Ok(body) => return Ok(body),
                Err(e) if attempt >= self.config.retries => return Err(e),
                Err(_) => {
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }

    fn fetch_json(&mut self, url: &str, q: u64) -> Result<(String, Value)> {
        let body = self.throttled_get(url).map_err(|e| LmfdbError::Unreachable {
            url: url.to_string(),
            reason: e.0,
            cache: cache_path(&self.config.cache_dir, q).display().to_string(),
        })?;
        let json = serde_json::from_str(&body).map_err(|e| payload_error(url, &body, e.to_string()))?;
        Ok((body, json))
    }

    /// Reads the cache if present; otherwise fetches (unless offline), writes the cache and
    /// returns its reloaded content.
    pub fn fetch_newforms(&mut self, q: u64) -> Result<Vec<IngestedForm>> {
        if let Some(forms) = self.read_cache(q)? {
            return Ok(forms);
        }
        if self.config.offline {
            return Err(LmfdbError::NoCache(cache_path(&self.config.cache_dir, q).display().to_string()));
        }
        let forms = self.download(q)?;
        self.write_cache(q, &forms)?;
        self.read_cache(q)?.ok_or_else(|| LmfdbError::NoCache(cache_path(&self.config.cache_dir, q).display().to_string()))
    }

    pub fn read_cache(&self, q: u64) -> Result<Option<Vec<IngestedForm>>> {
        let path = cache_path(&self.config.cache_dir, q);
        if !path.exists() {
            return Ok(None);
        }
        let record: LmfdbRecord = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        record.to_forms().map(Some)
    }

    fn write_cache(&self, q: u64, forms: &[IngestedForm]) -> Result<()> {
        let path = cache_path(&self.config.cache_dir, q);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, LmfdbRecord::from_forms(q, forms).to_json()?)?;
        Ok(())
    }

    /// Network fetch without touching the cache.
    pub fn download(&mut self, q: u64) -> Result<Vec<IngestedForm>> {
        let list_url = self.config.newforms_template.replace("{base}", &self.config.base_url).replace("{q}", &q.to_string());
        let (body, json) = self.fetch_json(&list_url, q)?;
        let mut orbits = Vec::new();
        for row in data_rows(&list_url, &body, &json)? {
            let label = row
                .get("label")
                .and_then(Value::as_str)
                .ok_or_else(|| payload_error(&list_url, &body, "newform row without label"))?;
            orbits.push(label.to_string());
        }
        orbits.sort();
        let fetched_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut forms = Vec::new();
        for orbit in orbits {
            let code = hecke_orbit_code(&orbit)?;
            let url = self
                .config
                .embeddings_template
                .replace("{base}", &self.config.base_url)
                .replace("{code}", &code.to_string());
            let (body, json) = self.fetch_json(&url, q)?;
            let mut embeddings = Vec::new();
            for row in data_rows(&url, &body, &json)? {
                let index = row.get("embedding_index").and_then(Value::as_u64).unwrap_or(1);
                let label = row
                    .get("lfunction_label")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("{orbit}.{index}"));
                let coeffs = row
                    .get("an_normalized")
                    .and_then(Value::as_array)
                    .ok_or_else(|| payload_error(&url, &body, "embedding without an_normalized"))?;
                let mut lambda_p = Vec::new();
                for (i, c) in coeffs.iter().enumerate() {
                    let n = i as u64 + 1;
                    if !is_prime(n) {
                        continue;
                    }
                    let re = match c {
                        Value::Array(pair) => pair.first().and_then(Value::as_f64),
                        other => other.as_f64(),
                    }
                    .ok_or_else(|| payload_error(&url, &body, format!("coefficient {n} is not numeric")))?;
                    lambda_p.push((n, re));
                }
                embeddings.push((index, IngestedForm { q, label, lambda_p, source_url: url.clone(), fetched_at }));
            }
            embeddings.sort_by_key(|e| e.0);
            forms.extend(embeddings.into_iter().map(|e| e.1));
        }
        Ok(forms)
    }
}
