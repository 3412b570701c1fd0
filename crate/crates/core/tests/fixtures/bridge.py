#!/usr/bin/env python3
"""Minimal stdio model server for protocol tests.

usage: bridge.py [--weights 0.5,0.5] [--arity N] [--outputs a,b]
                 [--mode ok|short|stale|error|hang|silent|crash|garbage]
"""
import argparse
import json
import sys
import time


def send(msg):
    sys.stdout.write(json.dumps(msg) + "\n")
    sys.stdout.flush()


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--weights", default="0.5,0.5")
    p.add_argument("--arity", type=int)
    p.add_argument("--outputs", default="y")
    p.add_argument("--mode", default="ok")
    p.add_argument("--log")
    args = p.parse_args()
    weights = [float(w) for w in args.weights.split(",")]
    arity = args.arity if args.arity is not None else len(weights)
    outputs = args.outputs.split(",")
    log = open(args.log, "w") if args.log else None

    if args.mode == "silent":
        time.sleep(30)
        return
    for line in sys.stdin:
        if log:
            log.write(line)
            log.flush()
        msg = json.loads(line)
        kind = msg.get("type")
        if kind == "hello":
            if args.mode == "crash":
                sys.stderr.write("model failed to load\n")
                sys.exit(3)
            send({"type": "metadata", "arity": arity, "outputs": outputs})
        elif kind == "predict":
            rows = msg["x"]
            y = [[sum(w * v for w, v in zip(weights, r)) + k for k in range(len(outputs))] for r in rows]
            if args.mode == "short":
                y = y[:-1]
            elif args.mode == "error":
                send({"type": "error", "id": msg["id"], "message": "cannot score"})
                continue
            elif args.mode == "hang":
                time.sleep(30)
            elif args.mode == "garbage":
                sys.stdout.write("not json\n")
                sys.stdout.flush()
                continue
            elif args.mode == "stale":
                send({"type": "result", "id": msg["id"] - 1, "y": [[-1.0]]})
            send({"type": "result", "id": msg["id"], "y": y})
        elif kind == "shutdown":
            return


if __name__ == "__main__":
    main()
