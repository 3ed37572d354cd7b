//! HTTP adapters for external sentiment/tone and NER services.
//!
//! Both adapters POST `{"text": ...}` as JSON to a configured URL, with an
//! optional bearer token read from an environment variable. Responses are
//! cached on disk under the SHA-256 of (adapter kind, URL, text), so a rerun
//! over the same corpus never goes back to the network.
//!
//! Expected response bodies:
//!
//! ```text
//! sentiment: {"emotions": {"sadness": 0.1, ...5 keys}, "tones": {"frustration": 0.0, ...7 keys}}
//! ner:       {"entities": [{"label": "PERSON", "start": 0, "end": 4}, ...]}
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::ner::{EntitySpan, EntityTagger, EntityType};
use super::sentiment::{SentimentProvider, SentimentToneProfile, EMOTIONS, TONES};
use super::ProviderError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub url: String,
    /// Environment variable holding a bearer token; `None` sends no credential.
    pub token_env: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub timeout_secs: u64,
}

impl HttpProviderConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token_env: None,
            cache_dir: None,
            timeout_secs: 30,
        }
    }
}

/// Content-addressed response cache. Writes go through a temporary file and a rename.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, ProviderError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| ProviderError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        let bytes = fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, value: &Value) -> Result<(), ProviderError> {
        let err = |e: std::io::Error| ProviderError::Cache(e.to_string());
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let mut f = fs::File::create(&tmp).map_err(err)?;
        f.write_all(value.to_string().as_bytes()).map_err(err)?;
        f.sync_all().map_err(err)?;
        fs::rename(&tmp, self.path(key)).map_err(err)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

struct Client {
    config: HttpProviderConfig,
    agent: ureq::Agent,
    cache: Option<DiskCache>,
}

impl Client {
    fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        let cache = config.cache_dir.clone().map(DiskCache::new).transpose()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build()
            .new_agent();
        Ok(Self {
            config,
            agent,
            cache,
        })
    }

    fn call(&self, kind: &str, text: &str) -> Result<Value, ProviderError> {
        let key = DiskCache::key(&[kind, &self.config.url, text]);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(hit);
        }
        let mut req = self.agent.post(&self.config.url);
        if let Some(var) = &self.config.token_env {
            let token = std::env::var(var).map_err(|_| ProviderError::MissingCredential(var.clone()))?;
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(serde_json::json!({ "text": text }))
            .map_err(|e| match e {
                ureq::Error::StatusCode(code) => ProviderError::Status(code),
                other => ProviderError::Http(other.to_string()),
            })?;
        let value: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Malformed(e.to_string()))?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &value)?;
        }
        Ok(value)
    }
}

pub struct HttpSentiment {
    client: Client,
}

impl HttpSentiment {
    pub fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        Ok(Self {
            client: Client::new(config)?,
        })
    }
}

fn score_block<const N: usize>(value: &Value, block: &str, keys: &[&str; N]) -> Result<[f64; N], ProviderError> {
    let obj = value
        .get(block)
        .and_then(Value::as_object)
        .ok_or_else(|| ProviderError::Malformed(format!("missing object {block:?}")))?;
    let mut out = [0.0; N];
    for (slot, key) in out.iter_mut().zip(keys) {
        *slot = obj
            .get(*key)
            .and_then(Value::as_f64)
            .ok_or_else(|| ProviderError::Malformed(format!("missing score {block}.{key}")))?;
    }
    Ok(out)
}

pub fn parse_sentiment_response(value: &Value) -> Result<SentimentToneProfile, ProviderError> {
    let profile = SentimentToneProfile {
        emotions: score_block(value, "emotions", &EMOTIONS)?,
        tones: score_block(value, "tones", &TONES)?,
    };
    profile.validate()?;
    Ok(profile)
}

impl SentimentProvider for HttpSentiment {
    fn analyze(&self, text: &str) -> Result<SentimentToneProfile, ProviderError> {
        parse_sentiment_response(&self.client.call("sentiment", text)?)
    }

    fn name(&self) -> String {
        format!("http:{}", self.client.config.url)
    }
}

pub struct HttpTagger {
    client: Client,
}

impl HttpTagger {
    pub fn new(config: HttpProviderConfig) -> Result<Self, ProviderError> {
        Ok(Self {
            client: Client::new(config)?,
        })
    }
}

#[derive(Deserialize)]
struct RawEntity {
    label: String,
    start: usize,
    end: usize,
}

pub fn parse_ner_response(value: &Value) -> Result<Vec<EntitySpan>, ProviderError> {
    let raw: Vec<RawEntity> = value
        .get("entities")
        .cloned()
        .map(serde_json::from_value)
        .transpose()
        .map_err(|e| ProviderError::Malformed(e.to_string()))?
        .ok_or_else(|| ProviderError::Malformed("missing array \"entities\"".into()))?;
    raw.into_iter()
        .map(|e| {
            let label: EntityType = e.label.parse().map_err(ProviderError::Malformed)?;
            Ok(EntitySpan {
                label,
                start: e.start,
                end: e.end,
            })
        })
        .collect()
}

impl EntityTagger for HttpTagger {
    fn tag(&self, text: &str) -> Result<Vec<EntitySpan>, ProviderError> {
        parse_ner_response(&self.client.call("ner", text)?)
    }

    fn name(&self) -> String {
        format!("http:{}", self.client.config.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;
    use std::thread;

    /// Serves exactly `n` requests with a fixed status and body, then exits.
    fn serve(n: usize, status: u16, body: &'static str) -> (String, thread::JoinHandle<usize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/analyze", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let mut served = 0;
            for stream in listener.incoming().take(n) {
                let mut stream = stream.unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
                served += 1;
            }
            served
        });
        (url, handle)
    }

    const SENTIMENT_BODY: &str = r#"{"emotions":{"sadness":0.5,"joy":0.1,"fear":0.2,"disgust":0.0,"anger":0.05},
        "tones":{"frustration":0.1,"satisfaction":0.2,"excitement":0.3,"politeness":0.4,"impoliteness":0.0,"sadness":0.6,"sympathy":0.7}}"#;

    #[test]
    fn sentiment_adapter_parses_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let (url, server) = serve(1, 200, SENTIMENT_BODY);
        let mut config = HttpProviderConfig::new(url);
        config.cache_dir = Some(dir.path().to_path_buf());
        let provider = HttpSentiment::new(config).unwrap();
        let first = provider.analyze("We need help.").unwrap();
        assert_eq!(first.emotion("sadness"), Some(0.5));
        assert_eq!(first.tone("sympathy"), Some(0.7));
        // The server is gone after one request; the second call must come from disk.
        assert_eq!(server.join().unwrap(), 1);
        assert_eq!(provider.analyze("We need help.").unwrap(), first);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn status_errors_are_typed() {
        let (url, server) = serve(1, 401, "{}");
        let provider = HttpSentiment::new(HttpProviderConfig::new(url)).unwrap();
        assert_eq!(provider.analyze("x").unwrap_err(), ProviderError::Status(401));
        server.join().unwrap();
    }

    #[test]
    fn missing_credential_is_reported() {
        let mut config = HttpProviderConfig::new("http://127.0.0.1:9/none");
        config.token_env = Some("FUNDSENTRY_TEST_UNSET_TOKEN".into());
        let provider = HttpSentiment::new(config).unwrap();
        assert_eq!(
            provider.analyze("x").unwrap_err(),
            ProviderError::MissingCredential("FUNDSENTRY_TEST_UNSET_TOKEN".into())
        );
    }

    #[test]
    fn ner_adapter_round_trip() {
        let (url, server) = serve(1, 200, r#"{"entities":[{"label":"PERSON","start":0,"end":4},{"label":"MONEY","start":10,"end":14}]}"#);
        let tagger = HttpTagger::new(HttpProviderConfig::new(url)).unwrap();
        let counts = super::super::ner::ner_counts("John gave $500 on Monday", &tagger).unwrap();
        assert_eq!(counts.get(EntityType::Person), 1);
        assert_eq!(counts.get(EntityType::Money), 1);
        assert_eq!(counts.total(), 2);
        server.join().unwrap();
    }

    #[test]
    fn malformed_bodies_rejected() {
        let v: Value = serde_json::from_str(r#"{"emotions":{"joy":0.1}}"#).unwrap();
        assert!(matches!(parse_sentiment_response(&v), Err(ProviderError::Malformed(_))));
        let v: Value = serde_json::from_str(r#"{"entities":[{"label":"ALIEN","start":0,"end":1}]}"#).unwrap();
        assert!(matches!(parse_ner_response(&v), Err(ProviderError::Malformed(_))));
        let v: Value = serde_json::from_str(r#"{}"#).unwrap();
        assert!(parse_ner_response(&v).is_err());
    }

    #[test]
    fn cache_keys_separate_parts() {
        assert_ne!(DiskCache::key(&["ab", "c"]), DiskCache::key(&["a", "bc"]));
    }
}
