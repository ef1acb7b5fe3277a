from __future__ import annotations

import json
import threading
import time

import pytest
import requests
from hypothesis import given
from hypothesis import strategies as st

from govaudit.chaindata import (
    CACHE_VERSION,
    CapabilityError,
    ChainData,
    ChainDataError,
    ConfigurationError,
    ContractMetadata,
    HttpTransport,
    ProviderConfig,
    ReplayMissError,
    ResponseCache,
    RetryPolicy,
    TransportError,
    cache_key,
    normalize_address,
)
from govaudit.chaindata.provider import decode_text_result
from govaudit.chaindata.world import WorldTransport, world_provider
from support import addresses, world

FAST = RetryPolicy(attempts=3, backoff=0.0)


def recorded(tmp_path, **kw):
    return world_provider(world(), "record", tmp_path, retry=FAST, **kw)


def test_record_then_replay_gives_identical_answers(tmp_path):
    a = addresses()
    rec = recorded(tmp_path)
    first = (rec.get_code(a["minidao"]), rec.get_creation(a["tornado-proposal"]), rec.get_abi(a["yam"]),
             rec.get_storage(a["minidao"], 0), rec.lookup_signature("0x3659cfe6"))
    assert rec.network_calls > 0 and len(rec.cache) > 0

    rep = world_provider(world(), "replay", tmp_path)
    second = (rep.get_code(a["minidao"]), rep.get_creation(a["tornado-proposal"]), rep.get_abi(a["yam"]),
              rep.get_storage(a["minidao"], 0), rep.lookup_signature("0x3659cfe6"))
    assert first == second
    assert rep.network_calls == 0


def test_replay_never_builds_a_transport(tmp_path):
    rep = world_provider(world(), "replay", tmp_path)
    with pytest.raises(AssertionError):
        rep.transport


def test_replay_miss_names_the_key(tmp_path):
    rep = world_provider(world(), "replay", tmp_path)
    with pytest.raises(ReplayMissError) as info:
        rep.get_code(addresses()["minidao"])
    assert info.value.key["method"] == "eth_getCode"
    assert info.value.digest in str(info.value)


def test_cache_file_format(tmp_path):
    rec = recorded(tmp_path)
    rec.get_code(addresses()["minidao"])
    key, digest = cache_key(1, "eth_getCode", [addresses()["minidao"]])
    entry = json.loads((tmp_path / f"{digest}.json").read_text())
    assert entry["govauditCache"] == CACHE_VERSION and entry["key"] == key
    assert entry["value"].startswith("0x")


def test_cache_rejects_unknown_version(tmp_path):
    cache = ResponseCache(tmp_path)
    key, digest = cache_key(1, "m", [])
    (tmp_path / f"{digest}.json").write_text(json.dumps({"govauditCache": 99, "key": key, "value": 1}))
    with pytest.raises(ValueError):
        cache.get(digest)


@given(st.integers(1, 10**6), st.text(max_size=10), st.lists(st.text(max_size=5), max_size=3))
def test_cache_key_is_deterministic_and_chain_sensitive(chain_id, method, params):
    k1, d1 = cache_key(chain_id, method, params)
    k2, d2 = cache_key(chain_id, method, list(params))
    assert d1 == d2 and k1 == k2
    assert cache_key(chain_id + 1, method, params)[1] != d1


def test_capability_error_is_recorded_and_replayed(tmp_path):
    w = world()
    w["tracing"] = False
    rec = world_provider(w, "record", tmp_path, retry=FAST)
    tx = next(iter(w["traces"]))
    with pytest.raises(CapabilityError):
        rec.get_trace_opcodes(tx)
    rep = world_provider(w, "replay", tmp_path)
    with pytest.raises(CapabilityError):
        rep.get_trace_opcodes(tx)


def test_creation_kind_falls_back_without_tracing():
    w = world()
    w["tracing"] = False
    p = world_provider(w, "live", retry=FAST)
    rec = p.get_creation(addresses()["tornado-proposal"])
    assert rec.kind_source in ("record", "assumed")


def test_other_errors_are_not_cached(tmp_path):
    rec = recorded(tmp_path)
    with pytest.raises(ChainDataError):
        rec.get_trace_opcodes("0x" + "ee" * 32)
    assert len(rec.cache) == 0


class Flaky:
    def __init__(self, failures: int, inner):
        self.failures = failures
        self.inner = inner

    def post_json(self, url, payload):
        if self.failures:
            self.failures -= 1
            raise TransportError("503")
        return self.inner.post_json(url, payload)

    def get_json(self, url, params):
        return self.inner.get_json(url, params)


def _config(**kw):
    from govaudit.chaindata.world import world_config

    return world_config("live", retry=FAST, **kw)


def test_transient_errors_are_retried():
    p = ChainData(_config(), Flaky(2, WorldTransport(world())))
    assert p.get_code(addresses()["minidao"])
    assert p.network_calls == 3


def test_retries_are_bounded():
    p = ChainData(_config(), Flaky(5, WorldTransport(world())))
    with pytest.raises(ChainDataError, match="giving up after 3"):
        p.get_code(addresses()["minidao"])


class Slow(WorldTransport):
    def post_json(self, url, payload):
        self._enter(url, payload)
        try:
            time.sleep(0.01)
        finally:
            self._leave()
        return super().post_json(url, payload)


def test_in_flight_requests_are_bounded():
    transport = Slow(world())
    p = ChainData(_config(max_in_flight=2), transport)
    threads = [threading.Thread(target=p.get_storage, args=(addresses()["minidao"], i)) for i in range(10)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert 1 <= transport.max_in_flight <= 2


def test_repeated_requests_are_memoised():
    p = world_provider(world(), "live")
    for _ in range(3):
        p.get_code(addresses()["minidao"])
    assert p.network_calls == 1


def test_config_from_env(tmp_path):
    env = {"GOVAUDIT_RPC_URL": "http://node", "GOVAUDIT_MODE": "replay", "GOVAUDIT_CACHE_DIR": str(tmp_path)}
    cfg = ProviderConfig.from_env(env)
    assert cfg.rpc_endpoint == "http://node" and cfg.mode == "replay" and cfg.cache_dir == tmp_path
    assert ProviderConfig.from_env(env, mode="live").mode == "live"


@pytest.mark.parametrize("kw", [{"mode": "offline"}, {"mode": "replay"}, {"max_in_flight": 0}])
def test_bad_configuration(kw):
    with pytest.raises(ConfigurationError):
        ProviderConfig(**kw)


def test_missing_endpoint_is_a_configuration_error():
    p = ChainData(ProviderConfig(), WorldTransport(world()))
    with pytest.raises(ConfigurationError):
        p.get_code(addresses()["minidao"])


def test_metadata_from_world():
    a = addresses()
    p = world_provider(world(), "live")
    yam = p.get_abi(a["yam"])
    assert yam.verified and any(s.startswith("_setPendingGov") for s in yam.abi)
    assert p.get_symbol(a["arena"]) == "ARENA" and p.get_decimals(a["arena"]) == 18
    assert p.get_name_tag(a["timelock"]) == "Timelock"
    assert p.call(a["minidao"], b"\x12\x34\x56\x78") is None
    assert not p.get_abi(a["bigcap"]).verified
    with pytest.raises(ValueError):
        ContractMetadata(a["bigcap"], False, ("f()",))


def test_text_results():
    assert decode_text_result(b"ABC".ljust(32, b"\0")) == "ABC"
    assert decode_text_result(None) is None
    assert decode_text_result(b"\xff" * 32) is None


def test_normalize_address():
    assert normalize_address("0x" + "AB" * 20) == "0x" + "ab" * 20
    with pytest.raises(ValueError):
        normalize_address("0x1234")


class FakeResponse:
    def __init__(self, status: int, body, url="http://x"):
        self.status_code = status
        self.url = url
        self._body = body

    def json(self):
        return self._body

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(str(self.status_code))


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.sent = []

    def post(self, url, json=None, timeout=None):
        self.sent.append(("post", url, json))
        return self._next()

    def get(self, url, params=None, timeout=None):
        self.sent.append(("get", url, params))
        return self._next()

    def _next(self):
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return r


def test_http_transport_maps_failures():
    session = FakeSession([
        FakeResponse(200, {"result": "0x01"}),
        FakeResponse(429, {}),
        FakeResponse(503, {}),
        requests.ConnectionError("refused"),
        FakeResponse(404, {}),
    ])
    t = HttpTransport(session=session)
    assert t.post_json("http://n", {"a": 1}) == {"result": "0x01"}
    for _ in range(3):
        with pytest.raises(TransportError):
            t.get_json("http://n", {})
    with pytest.raises(TransportError):
        t.get_json("http://n", {})
    assert session.sent[0] == ("post", "http://n", {"a": 1})


def test_scanner_key_is_sent():
    session = FakeSession([FakeResponse(200, {"status": "0", "message": "No data found", "result": None})])
    cfg = ProviderConfig(scanner_endpoint="http://scan", scanner_key="K")
    p = ChainData(cfg, HttpTransport(session=session))
    assert p.get_creation("0x" + "11" * 20) is None
    assert session.sent[0][2]["apikey"] == "K"
