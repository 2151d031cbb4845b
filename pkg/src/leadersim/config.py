"""JSON scenario and sweep files.

Parsing is strict: unknown keys, wrong types and out-of-range values all
raise ConfigError with the offending key in the message, so a typo in a
scenario file fails loudly instead of silently running the defaults.
"""

from __future__ import annotations

import json
from pathlib import Path

from .adversary import (
    AttackKind,
    AttackSpec,
    Delayed,
    ImmediateOnJoin,
    LieTarget,
    default_delta,
)
from .core import RplConstants
from .detector import DetectorConfig
from .sim import Scenario, EtxModel
from .sweeps import SweepSpec


class ConfigError(ValueError):
    """A scenario or sweep file that cannot be used as written."""


_SCENARIO_KEYS = {
    "area", "node_count", "tx_range", "seed", "link_loss", "etx",
    "packet_interval", "duration", "startup_delay_ms", "hop_latency",
    "sink", "key_hex", "data_traffic", "evict_detected", "attacks",
    "consts", "detector", "positions", "links",
}
_ATTACK_KEYS = {"node", "kind", "delta_r", "onset", "lie_target", "has_key",
                "forge_parent_rank", "drops_data"}
_CONSTS_KEYS = {"min_hop_rank_increase", "parent_switching_threshold",
                "root_rank", "dio_interval", "dao_refresh_interval"}
_DETECTOR_KEYS = {"mfri_factor", "single_child_hops", "exclude_flagged_from_mfri",
                  "mismatch_grace"}
_SWEEP_KEYS = {"variable", "values", "runs_per_point", "master_seed", "base"}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _check_keys(raw: dict, allowed: set[str], where: str) -> None:
    _require(isinstance(raw, dict), f"{where} must be an object")
    unknown = set(raw) - allowed
    _require(not unknown, f"unknown {where} keys: {sorted(unknown)}")


def _number(raw: object, key: str) -> float:
    _require(isinstance(raw, (int, float)) and not isinstance(raw, bool),
             f"{key} must be a number")
    return float(raw)


def _integer(raw: object, key: str) -> int:
    _require(isinstance(raw, int) and not isinstance(raw, bool),
             f"{key} must be an integer")
    return raw


def _boolean(raw: object, key: str) -> bool:
    _require(isinstance(raw, bool), f"{key} must be true or false")
    return raw


def _parse_onset(raw: object) -> ImmediateOnJoin | Delayed:
    if raw == "immediate":
        return ImmediateOnJoin()
    if isinstance(raw, dict) and set(raw) == {"delayed"}:
        at = _number(raw["delayed"], "attack onset delay")
        _require(at >= 0, "attack onset delay must be >= 0")
        return Delayed(at)
    raise ConfigError(
        'attack onset must be "immediate" or {"delayed": <seconds>}')


def _parse_enum(raw: object, enum_cls, key: str):
    _require(isinstance(raw, str), f"{key} must be a string")
    try:
        return enum_cls(raw)
    except ValueError:
        choices = sorted(member.value for member in enum_cls)
        raise ConfigError(f"{key} must be one of {choices}: got {raw!r}") from None


def _parse_attack(raw: dict, index: int, consts: RplConstants) -> AttackSpec:
    where = f"attacks[{index}]"
    _check_keys(raw, _ATTACK_KEYS, where)
    _require("node" in raw and "kind" in raw, f"{where} needs node and kind")
    kind = _parse_enum(raw["kind"], AttackKind, f"{where}.kind")
    kwargs: dict = {
        "node": _integer(raw["node"], f"{where}.node"),
        "kind": kind,
        "delta_r": default_delta(kind, consts),
    }
    if "delta_r" in raw:
        kwargs["delta_r"] = _integer(raw["delta_r"], f"{where}.delta_r")
    if "onset" in raw:
        kwargs["onset"] = _parse_onset(raw["onset"])
    if "lie_target" in raw:
        kwargs["lie_target"] = _parse_enum(
            raw["lie_target"], LieTarget, f"{where}.lie_target")
    if "has_key" in raw:
        kwargs["has_key"] = _boolean(raw["has_key"], f"{where}.has_key")
    if "drops_data" in raw:
        kwargs["drops_data"] = _boolean(raw["drops_data"], f"{where}.drops_data")
    if "forge_parent_rank" in raw and raw["forge_parent_rank"] is not None:
        kwargs["forge_parent_rank"] = _integer(
            raw["forge_parent_rank"], f"{where}.forge_parent_rank")
    try:
        return AttackSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_etx(raw: object) -> EtxModel:
    if isinstance(raw, str):
        _require(raw == "from_loss", 'etx string form must be "from_loss"')
        return EtxModel(from_loss=True)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return EtxModel(uniform=float(raw))
    if isinstance(raw, dict):
        per_link: dict[tuple[int, int], float] = {}
        for key, value in raw.items():
            parts = key.split("-")
            _require(len(parts) == 2 and all(p.isdigit() for p in parts),
                     f'etx link key must look like "3-7": got {key!r}')
            per_link[(int(parts[0]), int(parts[1]))] = _number(value, f"etx[{key}]")
        return EtxModel(uniform=1.0, per_link=per_link)
    raise ConfigError('etx must be a number, "from_loss", or a link map')


def _parse_positions(raw: object) -> dict[int, tuple[float, float]]:
    _require(isinstance(raw, dict), "positions must be an object")
    out: dict[int, tuple[float, float]] = {}
    for key, value in raw.items():
        _require(key.isdigit(), f"positions key must be a node id: got {key!r}")
        _require(isinstance(value, list) and len(value) == 2,
                 f"positions[{key}] must be [x, y]")
        out[int(key)] = (_number(value[0], f"positions[{key}].x"),
                         _number(value[1], f"positions[{key}].y"))
    return out


def _parse_links(raw: object) -> list[tuple[int, int, float]]:
    _require(isinstance(raw, list), "links must be a list")
    out: list[tuple[int, int, float]] = []
    for i, entry in enumerate(raw):
        _require(isinstance(entry, list) and len(entry) in (2, 3),
                 f"links[{i}] must be [a, b] or [a, b, etx]")
        a = _integer(entry[0], f"links[{i}][0]")
        b = _integer(entry[1], f"links[{i}][1]")
        etx = _number(entry[2], f"links[{i}][2]") if len(entry) == 3 else 1.0
        out.append((a, b, etx))
    return out


def parse_scenario(raw: dict) -> Scenario:
    _check_keys(raw, _SCENARIO_KEYS, "scenario")
    kwargs: dict = {}
    if "area" in raw:
        _require(isinstance(raw["area"], list) and len(raw["area"]) == 2,
                 "area must be [width, height]")
        kwargs["area"] = (_number(raw["area"][0], "area width"),
                          _number(raw["area"][1], "area height"))
    for key in ("node_count", "seed", "sink"):
        if key in raw:
            kwargs[key] = _integer(raw[key], key)
    for key in ("tx_range", "link_loss", "packet_interval", "duration",
                "startup_delay_ms", "hop_latency"):
        if key in raw:
            kwargs[key] = _number(raw[key], key)
    if "etx" in raw:
        kwargs["etx"] = _parse_etx(raw["etx"])
    if "key_hex" in raw:
        _require(isinstance(raw["key_hex"], str), "key_hex must be a string")
        try:
            key = bytes.fromhex(raw["key_hex"])
        except ValueError:
            raise ConfigError("key_hex must be hexadecimal") from None
        _require(len(key) == 16, "key_hex must encode exactly 16 bytes")
        kwargs["key"] = key
    for key in ("data_traffic", "evict_detected"):
        if key in raw:
            kwargs[key] = _boolean(raw[key], key)
    if "consts" in raw:
        _check_keys(raw["consts"], _CONSTS_KEYS, "consts")
        cast = {
            "min_hop_rank_increase": _integer,
            "root_rank": _integer,
            "parent_switching_threshold": _number,
            "dio_interval": _number,
            "dao_refresh_interval": _number,
        }
        kwargs["consts"] = RplConstants(
            **{k: cast[k](v, f"consts.{k}") for k, v in raw["consts"].items()})
    if "attacks" in raw:
        _require(isinstance(raw["attacks"], list), "attacks must be a list")
        consts = kwargs.get("consts", RplConstants())
        kwargs["attacks"] = [
            _parse_attack(a, i, consts) for i, a in enumerate(raw["attacks"])
        ]
    if "detector" in raw:
        _check_keys(raw["detector"], _DETECTOR_KEYS, "detector")
        det = dict(raw["detector"])
        if "mfri_factor" in det and det["mfri_factor"] is not None:
            det["mfri_factor"] = _number(det["mfri_factor"], "detector.mfri_factor")
        if "single_child_hops" in det:
            det["single_child_hops"] = _integer(
                det["single_child_hops"], "detector.single_child_hops")
        if "exclude_flagged_from_mfri" in det:
            det["exclude_flagged_from_mfri"] = _boolean(
                det["exclude_flagged_from_mfri"], "detector.exclude_flagged_from_mfri")
        if "mismatch_grace" in det:
            det["mismatch_grace"] = _number(det["mismatch_grace"],
                                            "detector.mismatch_grace")
        kwargs["detector"] = DetectorConfig(**det)
    if "positions" in raw:
        kwargs["positions"] = _parse_positions(raw["positions"])
    if "links" in raw:
        kwargs["links"] = _parse_links(raw["links"])
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_sweep(raw: dict) -> SweepSpec:
    _check_keys(raw, _SWEEP_KEYS, "sweep")
    _require("variable" in raw and "values" in raw,
             "sweep needs variable and values")
    _require(isinstance(raw["values"], list) and raw["values"],
             "sweep values must be a non-empty list")
    kwargs: dict = {
        "variable": raw["variable"],
        "values": tuple(_number(v, f"values[{i}]")
                        for i, v in enumerate(raw["values"])),
    }
    if raw["variable"] in ("attacker_hop_distance", "node_count"):
        kwargs["values"] = tuple(int(v) for v in kwargs["values"])
    if "runs_per_point" in raw:
        kwargs["runs_per_point"] = _integer(raw["runs_per_point"], "runs_per_point")
    if "master_seed" in raw:
        kwargs["master_seed"] = _integer(raw["master_seed"], "master_seed")
    if "base" in raw:
        kwargs["base"] = parse_scenario(raw["base"])
    try:
        return SweepSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _load_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), f"{path} must contain a JSON object")
    return raw


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(_load_json(path))


def load_sweep(path: str | Path) -> SweepSpec:
    return parse_sweep(_load_json(path))
