#!/usr/bin/env python3
"""OpenAI-compatible /v1/embeddings endpoint backed by a local encoder.

    python3 scripts/encoder_server.py --port 8089
    factsim --encoder remote --encoder-api-base http://127.0.0.1:8089/v1 \
        --encoder-model wordllama/l2_supercat-256 score reviews.txt summary.txt

Backends:
  wordllama              WordLlama l2_supercat, 256 dims (pip install wordllama);
                         weights ship inside the wheel, no download needed
  sentence-transformers  any sentence-transformers model id given by --model
                         (downloads from the Hugging Face hub on first use)

With --port 0 a free port is chosen. The first stdout line is
"listening on http://HOST:PORT/v1".
"""

import argparse
import json
import shutil
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

WORDLLAMA_ID = "wordllama/l2_supercat-256"


def load_wordllama():
    import wordllama
    from wordllama import WordLlama

    # The wheel bundles the tokenizer under tokenizers/, but the loader looks
    # in its cache directory and otherwise tries the network.
    cache = Path.home() / ".cache" / "factsim-wordllama"
    dst = WordLlama.get_file_path("tokenizer", cache)
    dst.mkdir(parents=True, exist_ok=True)
    src = Path(wordllama.__file__).parent / "tokenizers" / "l2_supercat_tokenizer_config.json"
    if src.exists() and not (dst / src.name).exists():
        shutil.copy(src, dst)
    wl = WordLlama.load(cache_dir=cache, disable_download=True)
    return WORDLLAMA_ID, lambda texts: [list(map(float, v)) for v in wl.embed(texts)]


def load_sentence_transformers(model_id):
    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(model_id)
    return model_id, lambda texts: [list(map(float, v)) for v in model.encode(texts)]


def make_handler(model_id, encode):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def reply(self, status, payload):
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if not self.path.rstrip("/").endswith("/embeddings"):
                return self.reply(404, {"error": {"message": f"no route {self.path}"}})
            try:
                req = json.loads(self.rfile.read(int(self.headers.get("Content-Length", 0))))
                texts = req["input"]
                if isinstance(texts, str):
                    texts = [texts]
                if req.get("model") not in (None, model_id):
                    return self.reply(
                        400, {"error": {"message": f"this server serves {model_id}, not {req['model']}"}}
                    )
            except (ValueError, KeyError, TypeError) as e:
                return self.reply(400, {"error": {"message": str(e)}})
            vectors = encode(texts) if texts else []
            self.reply(
                200,
                {
                    "object": "list",
                    "model": model_id,
                    "data": [
                        {"object": "embedding", "index": i, "embedding": v}
                        for i, v in enumerate(vectors)
                    ],
                },
            )

    return Handler


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8089)
    ap.add_argument("--backend", choices=["wordllama", "sentence-transformers"], default="wordllama")
    ap.add_argument("--model", default="sentence-transformers/distiluse-base-multilingual-cased-v1")
    args = ap.parse_args()

    try:
        if args.backend == "wordllama":
            model_id, encode = load_wordllama()
        else:
            model_id, encode = load_sentence_transformers(args.model)
    except Exception as e:  # missing package, weights, or network
        print(f"error: cannot load {args.backend} encoder: {e}", file=sys.stderr)
        sys.exit(1)

    server = ThreadingHTTPServer((args.host, args.port), make_handler(model_id, encode))
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}/v1 model={model_id}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()
