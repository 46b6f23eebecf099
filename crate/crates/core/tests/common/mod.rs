#![allow(dead_code)]

pub mod bench;
pub mod kendall;
pub mod lcs;
pub mod props;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use factsim::extraction::{FactSet, FactTuple};
use serde_json::Value;

/// Toy sentences with the completions a chat model returned for them.
pub const TOY_SENTENCES: [(&str, &str); 4] = [
    (
        "The car is not good, it is not fast at all",
        "[['car', 'bad'], ['car', 'slow']]",
    ),
    (
        "The car is good, it is very fast",
        "[['car', 'good'], ['car', 'fast']]",
    ),
    (
        "The car is bad, it is slow",
        "[['car', 'bad'], ['car', 'slow']]",
    ),
    (
        "The car is great, it is quick",
        "[['car', 'great'], ['car', 'quick']]",
    ),
];

pub const TOY_TUPLES: [[(&str, &str); 2]; 4] = [
    [("car", "bad"), ("car", "slow")],
    [("car", "good"), ("car", "fast")],
    [("car", "bad"), ("car", "slow")],
    [("car", "great"), ("car", "quick")],
];

pub const REFERENCE_CLAIM: &str = "The car is fast";

/// Claims compared against the reference, with their tuple, whether they
/// entail it, and the published FactSim / R-1 / R-2 / R-L values.
pub struct Claim {
    pub text: &'static str,
    pub tuple: (&'static str, &'static str),
    pub entails: bool,
    pub factsim: f64,
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

pub const CLAIMS: [Claim; 7] = [
    Claim {
        text: "The car is not slow",
        tuple: ("car", "fast"),
        entails: true,
        factsim: 1.00,
        r1: 0.67,
        r2: 0.57,
        rl: 0.67,
    },
    Claim {
        text: "The car is quick",
        tuple: ("car", "quick"),
        entails: true,
        factsim: 0.84,
        r1: 0.75,
        r2: 0.67,
        rl: 0.75,
    },
    Claim {
        text: "The car is pretty fast around the corners",
        tuple: ("car", "fast"),
        entails: true,
        factsim: 1.00,
        r1: 0.67,
        r2: 0.40,
        rl: 0.67,
    },
    Claim {
        text: "The car is slow",
        tuple: ("car", "slow"),
        entails: false,
        factsim: 0.76,
        r1: 0.75,
        r2: 0.67,
        rl: 0.75,
    },
    Claim {
        text: "The car is not fast",
        tuple: ("car", "slow"),
        entails: false,
        factsim: 0.76,
        r1: 0.89,
        r2: 0.57,
        rl: 0.89,
    },
    Claim {
        text: "The car is sluggish",
        tuple: ("car", "sluggish"),
        entails: false,
        factsim: 0.53,
        r1: 0.75,
        r2: 0.67,
        rl: 0.75,
    },
    Claim {
        text: "The car is pretty slow around the corners",
        tuple: ("car", "slow"),
        entails: false,
        factsim: 0.76,
        r1: 0.50,
        r2: 0.40,
        rl: 0.50,
    },
];

/// Eight jewelry reviews and a generated summary of them.
pub const PENDANT_REVIEWS: [&str; 8] = [
    "This pendant is so unique!! The design is beautiful and the bail is a ring instead of the typical bail which gives it a nice touch!! All the corners are smooth and my daughter loves it - looks great on her.I cannot say anything about the chain because used our own chain.:) Satisfied.",
    "It look perfect in a womens neck!! great gift, I thought for the price it was going to look cheap, but I was far wrong. It look great.Spect great reward from your woman when you give this to her; D",
    "The prettiest sterling silver piece I own now. I get so many compliments on this necklace. I bought it for myself from my hubby for Valentine's Day. Why not? When people ask where I got it, I simply say from my loving hubby. And he is off the hook as to what to get me. win + win.",
    "I love hearts and I love 'love':) I do not have any negative feedback, the necklace is perfect and the charm is perfect. I just thought it would have been slightly bigger. Overall, I love my new heart necklace.",
    "When I received the package, I was surprised and amazed because the necklace is so elegant, beautiful and the same as the picture shown here. I really love this necklace. It has a unique pendant designed. I will recommend it to someone to order it now...",
    "Item is nice. Not a great quality item, but right for the price. Charm was larger than I expected (I expected small and elegant, but it was large and almost costume jewelry like). I think it is a good necklace, just not what I expected.",
    "I got this as a present for my GF on Valintines day. She loves it and wears it every day! Its not cheap looking and it hasn't broken yet. The chain hasn't broken either even though it is very thin. Strongly recomend it!",
    "Over all service has been great the only problem, I ordered a purple Mickey Mouse case for iPhone 4S they sent a black, n I felt it was to much trouble n such a small item to send back so needless to say its put back in a drawer somewhere",
];

pub const PENDANT_SUMMARY: &str = "The pendant is unique and beautiful with a ring bail, giving it a nice touch. Smooth corners and loved by daughters. Great gift for women, looks perfect and not cheap at all. Sterling silver piece with many compliments received. Perfect heart necklace, slightly smaller than expected but still loved. Elegant and beautiful necklace, exactly as shown in the picture. Good quality item for the price, charm larger than expected. Not cheap looking, durable chain. Overall great service, minor issue with wrong color sent. Recommended for a unique pendant design.";

/// Hand-written completions for the eight reviews. (price, affordable) is
/// planted in review 1 only; (pendant, recommended) only in the summary.
pub const PENDANT_REVIEW_COMPLETIONS: [&str; 8] = [
    "[('pendant', 'unique'), ('design', 'beautiful'), ('corners', 'smooth'), ('daughter', 'loves')]",
    "[('necklace', 'perfect'), ('gift', 'great'), ('price', 'affordable')]",
    "[('necklace', 'pretty'), ('necklace', 'compliments')]",
    "[('necklace', 'perfect'), ('charm', 'perfect'), ('necklace', 'small')]",
    "[('necklace', 'elegant'), ('necklace', 'beautiful'), ('pendant', 'unique')]",
    "[('quality', 'mediocre'), ('charm', 'large')]",
    "[('necklace', 'sturdy'), ('chain', 'thin')]",
    "[('service', 'great'), ('color', 'wrong')]",
];

pub const PENDANT_SUMMARY_COMPLETION: &str = "[('pendant', 'unique'), ('pendant', 'beautiful'), ('corners', 'smooth'), ('gift', 'great'), ('necklace', 'perfect'), ('charm', 'large'), ('chain', 'durable'), ('service', 'great'), ('pendant', 'recommended')]";

pub fn tuple(s: &str, d: &str) -> FactTuple {
    FactTuple::new(s, d).unwrap()
}

pub fn facts(pairs: &[(&str, &str)]) -> FactSet {
    FactSet::from_tuples(pairs.iter().map(|(s, d)| tuple(s, d)).collect())
}

#[derive(Debug, Clone)]
pub struct Recorded {
    pub path: String,
    pub authorization: Option<String>,
    pub body: Value,
}

type Handler = dyn Fn(&str, &Value, usize) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server on localhost. The handler gets the request path,
/// the JSON body, and the zero-based request number.
pub struct MockServer {
    pub base_url: String,
    pub requests: Arc<Mutex<Vec<Recorded>>>,
    stop: Arc<AtomicBool>,
    addr: std::net::SocketAddr,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(
        handler: impl Fn(&str, &Value, usize) -> (u16, String) + Send + Sync + 'static,
    ) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        let thread = {
            let requests = requests.clone();
            let stop = stop.clone();
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    if let Ok(stream) = stream {
                        let _ = serve(stream, &*handler, &requests);
                    }
                }
            })
        };
        MockServer {
            base_url: format!("http://{addr}/v1"),
            requests,
            stop,
            addr,
            thread: Some(thread),
        }
    }

    pub fn recorded(&self) -> Vec<Recorded> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn serve(
    stream: TcpStream,
    handler: &Handler,
    requests: &Mutex<Vec<Recorded>>,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let path = request_line
        .split_whitespace()
        .nth(1)
        .unwrap_or("")
        .to_string();
    let mut length = 0usize;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            let value = value.trim().to_string();
            match name.to_ascii_lowercase().as_str() {
                "content-length" => length = value.parse().unwrap_or(0),
                "authorization" => authorization = Some(value),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;
    let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let n = {
        let mut r = requests.lock().unwrap();
        r.push(Recorded {
            path: path.clone(),
            authorization,
            body: body.clone(),
        });
        r.len() - 1
    };
    let (status, payload) = handler(&path, &body, n);
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    stream.flush()
}

/// Chat completion response body.
pub fn chat_response(content: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}

/// The text appended after the instruction block in a chat request.
pub fn prompt_input(body: &Value) -> String {
    let prompt = body["messages"][0]["content"].as_str().unwrap_or("");
    prompt
        .split_once("### Customer reviews:\n")
        .map(|(_, t)| t.to_string())
        .unwrap_or_default()
}
