#!/usr/bin/env python3
"""Write the synthetic corpora to line-per-sentence text files."""

import argparse

from wordchoice.synthetic import (
    JointContextSpec,
    joint_context_corpus,
    template_corpus,
    write_corpus,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("kind", choices=["template", "joint"])
    parser.add_argument("out", help="output corpus path")
    parser.add_argument("--sentences", type=int, default=2000,
                        help="template corpus size")
    parser.add_argument("--templates", type=int, default=40)
    parser.add_argument("--markers", type=int, default=5,
                        help="joint corpus marker count per side")
    parser.add_argument("--repeats", type=int, default=24)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    if args.kind == "template":
        corpus = template_corpus(args.sentences, args.templates, seed=args.seed)
    else:
        spec = JointContextSpec(n_markers=args.markers, repeats=args.repeats)
        corpus = joint_context_corpus(spec, seed=args.seed)
    write_corpus(args.out, corpus)
    print(f"wrote {len(corpus)} sentences to {args.out}")


if __name__ == "__main__":
    main()
