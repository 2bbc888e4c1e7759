"""Synthetic genome landscape: parsing, metrics formula, brute-force oracle."""

from __future__ import annotations

import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from evosearch.genome import (
    CHANNEL_VALUES,
    Genome,
    all_genomes,
    brute_force_optimum,
    parse_genome,
    synthetic_metrics,
)
from evosearch.harness import dedup_key


class TestParse:
    def test_reference_format(self):
        assert parse_genome("64:64:64:64:64").channels == (64, 64, 64, 64, 64)

    def test_plain_parse(self):
        assert parse_genome("8:16:24:32:40").channels == (8, 16, 24, 32, 40)

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            parse_genome("64:64:64:64")

    def test_illegal_value(self):
        with pytest.raises(ValueError):
            parse_genome("8:8:8:8:9")

    def test_non_numeric(self):
        with pytest.raises(ValueError):
            parse_genome("a:b:c:d:e")

    def test_serialize_round_trip(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            channels = tuple(int(rng.choice(CHANNEL_VALUES)) for _ in range(5))
            genome = Genome(channels)
            assert parse_genome(genome.serialize()) == genome


class TestMetrics:
    def test_all_eight_param_count(self):
        num_params, _ = synthetic_metrics("8:8:8:8:8")
        assert num_params == 72 + 4 * 64 + 80 == 408

    def test_all_sixtyfour_param_count(self):
        num_params, _ = synthetic_metrics("64:64:64:64:64")
        assert num_params == 576 + 4 * 4096 + 640 == 17600

    def test_all_sixtyfour_error_near_formula_floor(self):
        # 0.30 - 0.22 at the log-sum maximum, plus at most 0.03 of ripple.
        _, err = synthetic_metrics("64:64:64:64:64")
        assert abs(err - 0.08) <= 0.03

    def test_pure_function(self):
        a = synthetic_metrics("16:24:32:40:48")
        b = synthetic_metrics("16:24:32:40:48")
        assert a == b

    def test_error_bounds(self):
        for genome in itertools.islice(all_genomes(), 0, 32768, 101):
            _, err = synthetic_metrics(genome)
            assert 0.01 <= err <= 0.99

    def test_monotone_backbone(self):
        """Ignoring ripple, raising one channel strictly grows the size and
        weakly shrinks the smooth error term."""
        rng = np.random.default_rng(22)
        for _ in range(300):
            channels = [int(rng.choice(CHANNEL_VALUES)) for _ in range(5)]
            position = int(rng.integers(5))
            if channels[position] == 64:
                continue
            bigger = list(channels)
            bigger[position] = CHANNEL_VALUES[CHANNEL_VALUES.index(channels[position]) + 1]

            def smooth_parts(cs):
                g = Genome(tuple(cs))
                num_params, _ = synthetic_metrics(g)
                backbone = 0.30 - 0.22 * (
                    sum(math.log(c / 8.0) for c in cs) / (5 * math.log(8.0))
                )
                return num_params, backbone

            size_a, err_a = smooth_parts(channels)
            size_b, err_b = smooth_parts(bigger)
            assert size_b > size_a
            assert err_b <= err_a


class TestBruteForce:
    def test_full_space_optimum_is_pinned(self):
        genome, fitness = brute_force_optimum()
        assert genome.serialize() == "8:8:8:8:8"
        assert fitness == pytest.approx(-119.3686927130872, abs=1e-9)
        # the stored value is exactly -(num_params * val_error)
        num_params, val_error = synthetic_metrics(genome)
        assert fitness == -(num_params * val_error) + 0.0

    def test_restricted_space_matches_hand_enumeration(self):
        want_best = None
        for channels in itertools.product((8, 64), repeat=5):
            num_params, val_error = synthetic_metrics(Genome(channels))
            fitness = -(num_params * val_error) + 0.0
            if want_best is None or fitness > want_best[1]:
                want_best = (Genome(channels), fitness)
        assert brute_force_optimum((8, 64)) == want_best

    def test_beats_random_genomes(self):
        _, best = brute_force_optimum()
        rng = np.random.default_rng(23)
        for _ in range(1000):
            channels = tuple(int(rng.choice(CHANNEL_VALUES)) for _ in range(5))
            num_params, val_error = synthetic_metrics(Genome(channels))
            assert best >= -(num_params * val_error)

    def test_space_size_and_key_collisions(self):
        keys = {dedup_key(g.serialize()) for g in all_genomes()}
        assert len(keys) == 8**5 == 32768


class TestEvaluatorExecutable:
    def run_eval(self, tmp_path, content):
        code = tmp_path / "genome.txt"
        code.write_text(content)
        return subprocess.run(
            [sys.executable, "-m", "evosearch.genome", str(code)],
            capture_output=True,
            text=True,
            timeout=30,
        )

    def test_prints_protocol_line(self, tmp_path):
        result = self.run_eval(tmp_path, "8:16:24:32:40\n")
        assert result.returncode == 0
        payload = json.loads(result.stdout.strip().splitlines()[-1])
        num_params, val_error = synthetic_metrics("8:16:24:32:40")
        assert payload == {"num_params": num_params, "val_error": val_error}

    def test_illegal_genome_exits_one(self, tmp_path):
        result = self.run_eval(tmp_path, "not a genome")
        assert result.returncode == 1
        assert result.stdout == ""

    def test_subprocess_agrees_with_formula_on_samples(self, tmp_path):
        rng = np.random.default_rng(24)
        for _ in range(8):
            channels = tuple(int(rng.choice(CHANNEL_VALUES)) for _ in range(5))
            text = Genome(channels).serialize()
            result = self.run_eval(tmp_path, text)
            payload = json.loads(result.stdout.strip().splitlines()[-1])
            num_params, val_error = synthetic_metrics(text)
            assert payload["num_params"] == num_params
            assert payload["val_error"] == val_error
