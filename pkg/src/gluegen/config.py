"""Run configuration: flat key = value files with '#' comments.

Command-line flags override file values; every effective value is echoed
into the output MANIFEST so reruns are auditable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import FilterSpec
from .engine import LrSchedule
from .model.config import ModelConfig
from .model.training import TrainingSchedule

_DEFAULTS = {
    "seed": "42",
    "out_dir": "out",
    "compounds_csv": "",
    "sdf_file": "",
    "ligase_fasta": "",
    "embeddings_file": "",
    "train.dataset": "",
    "train.include_low": "false",
    "train.resume": "",
    "train.epochs": "500",
    "train.batch_size": "4",
    "train.beta_step": "0.002",
    "train.beta_max": "1.0",
    "train.base_lr": "0.001",
    "generate.n_per_ligase": "10",
    "generate.ligases": "",
    "eval.samples_csv": "",
    "eval.training_file": "",
    "eval.method": "tsne",
    "eval.perplexity": "15",
    "eval.iterations": "500",
    "eval.train_sample": "100",
    "report.scores_csv": "",
    "filter.mw_min": "130",
    "filter.mw_max": "725",
    "filter.logp_min": "-2",
    "filter.logp_max": "6.5",
    "filter.logs_min": "-6.5",
    "filter.logs_max": "0.5",
    "filter.logherg_max": "-5",
    "filter.metab_min": "1",
    "filter.metab_max": "8",
    "filter.ro5_max": "1",
    "model.hidden": "64",
    "model.z_tree": "16",
    "model.z_graph": "16",
    "model.seq_embed": "128",
    "model.fused": "32",
    "model.mp_iters": "3",
    "model.tree_iters": "4",
    "model.max_decode_nodes": "30",
    "model.fusion_mode": "concat",
    "model.seq_encoder_mode": "kmer",
    "model.attn_heads": "1",
    "model.attn_dim": "16",
    "model.external_dim": "0",
    "model.assembly_cap": "100",
}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


@dataclass
class RunConfig:
    values: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | None, overrides: dict[str, str] | None = None) -> "RunConfig":
        values = dict(_DEFAULTS)
        if path:
            text = Path(path).read_text(encoding="utf-8")
            file_values = parse_config_text(text)
            unknown = set(file_values) - set(_DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
            values.update(file_values)
        if overrides:
            unknown = set(overrides) - set(_DEFAULTS)
            if unknown:
                raise ConfigError(f"unknown override keys: {', '.join(sorted(unknown))}")
            values.update({k: str(v) for k, v in overrides.items()})
        return cls(values=values)

    def get(self, key: str) -> str:
        return self.values[key]

    def get_int(self, key: str) -> int:
        return int(self.values[key])

    def get_float(self, key: str) -> float:
        return float(self.values[key])

    def get_bool(self, key: str) -> bool:
        v = self.values[key].lower()
        if v in ("true", "yes", "1"):
            return True
        if v in ("false", "no", "0", ""):
            return False
        raise ConfigError(f"{key}: cannot read {v!r} as a flag")

    @property
    def seed(self) -> int:
        return self.get_int("seed")

    @property
    def out_dir(self) -> Path:
        return Path(self.get("out_dir"))

    def filter_spec(self) -> FilterSpec:
        return FilterSpec(
            mw_min=self.get_float("filter.mw_min"),
            mw_max=self.get_float("filter.mw_max"),
            logp_min=self.get_float("filter.logp_min"),
            logp_max=self.get_float("filter.logp_max"),
            logs_min=self.get_float("filter.logs_min"),
            logs_max=self.get_float("filter.logs_max"),
            logherg_max=self.get_float("filter.logherg_max"),
            metab_min=self.get_int("filter.metab_min"),
            metab_max=self.get_int("filter.metab_max"),
            ro5_max=self.get_int("filter.ro5_max"),
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            hidden=self.get_int("model.hidden"),
            z_tree=self.get_int("model.z_tree"),
            z_graph=self.get_int("model.z_graph"),
            seq_embed=self.get_int("model.seq_embed"),
            fused=self.get_int("model.fused"),
            mp_iters=self.get_int("model.mp_iters"),
            tree_iters=self.get_int("model.tree_iters"),
            max_decode_nodes=self.get_int("model.max_decode_nodes"),
            fusion_mode=self.get("model.fusion_mode"),
            seq_encoder_mode=self.get("model.seq_encoder_mode"),
            attn_heads=self.get_int("model.attn_heads"),
            attn_dim=self.get_int("model.attn_dim"),
            external_dim=self.get_int("model.external_dim"),
            assembly_cap=self.get_int("model.assembly_cap"),
        )

    def training_schedule(self) -> TrainingSchedule:
        return TrainingSchedule(
            beta_step=self.get_float("train.beta_step"),
            beta_max=self.get_float("train.beta_max"),
            epochs=self.get_int("train.epochs"),
            batch_size=self.get_int("train.batch_size"),
        )

    def lr_schedule(self) -> LrSchedule:
        return LrSchedule(base_lr=self.get_float("train.base_lr"))

    def echo(self) -> list[str]:
        return [f"{k} = {self.values[k]}" for k in sorted(self.values)]
