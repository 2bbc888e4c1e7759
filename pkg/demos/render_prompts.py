"""Show exactly what the generation backend is asked to complete.

Prompts are byte-exact artifacts: two in-context examples, each a metrics
block followed by its code, then a target block asking for something
smaller and better, then the completion stub. The target numbers follow
the shrink/stretch rule (90% of the smallest parent, 102% of the best
parent accuracy, rounded half away from zero).

Usage:
    python3 demos/render_prompts.py
"""

from __future__ import annotations

from evosearch import (
    Candidate,
    Metrics,
    Origin,
    SearchConfig,
    Status,
    compute_target_metrics,
    make_few_shot_prompt,
)

NET_A = """class Model(nn.Module):
  @nn.compact
  def __call__(self, x):
    x = nn.Dense(features=10)(x)
    return x"""

NET_B = """class Model(nn.Module):
  @nn.compact
  def __call__(self, x):
    x = nn.Dense(features=20)(x)
    return nn.Dense(features=10)(x)"""


def example(cid: int, size: int, accuracy: float, code: str) -> Candidate:
    return Candidate(
        id=cid,
        round=0,
        origin=Origin.SEED,
        code=code,
        status=Status.EVALUATED,
        metrics=Metrics(size, 1.0 - accuracy),
        fitness=-(size * (1.0 - accuracy)),
    )


def main() -> int:
    config = SearchConfig()
    parents = [example(1, 4800, 0.865, NET_A), example(2, 4300, 0.880, NET_B)]

    size, accuracy = compute_target_metrics(parents, config)
    print("target rule on these parents:")
    print(f"  min size 4300  -> x0.90 -> round to 100  -> {size}")
    print(f"  max acc  0.880 -> x1.02 -> round to 0.001 -> {accuracy}")
    print()

    prompt = make_few_shot_prompt(parents, config, prompt_id="demo")
    print("---- prompt text (between the markers, no trailing newline) ----")
    print(prompt.text, end="")
    print("\n---- end ----")
    print()
    print(f"prompt id         : {prompt.id}")
    print(f"example ids       : {prompt.example_ids}")
    print(f"conditioning size : {prompt.target_num_params}")
    print(f"conditioning acc  : {prompt.target_val_accuracy}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
