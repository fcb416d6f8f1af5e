import httpx
import pytest

from facetseg.corpus import RateLimiter, fetch_pages


def transport_for(pages: dict[str, str]):
    def handler(request: httpx.Request) -> httpx.Response:
        body = pages.get(str(request.url))
        if body is None:
            return httpx.Response(404, text="missing")
        return httpx.Response(200, text=body)

    return httpx.MockTransport(handler)


class TestFetchPages:
    def test_fetches_and_normalizes_domain(self):
        pages = {"https://www.x.com/about": "<p>hello there</p>"}
        client = httpx.Client(transport=transport_for(pages))
        out = fetch_pages(["https://www.x.com/about"], rate_per_sec=1000, client=client)
        assert len(out) == 1
        assert out[0].domain == "x.com"
        assert out[0].html == "<p>hello there</p>"
        assert out[0].fetched_at > 0

    def test_failures_skipped(self):
        client = httpx.Client(transport=transport_for({"https://ok.com/": "<p>fine page</p>"}))
        out = fetch_pages(["https://ok.com/", "https://broken.com/"], rate_per_sec=1000, client=client)
        assert [p.url for p in out] == ["https://ok.com/"]


class TestRateLimiter:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            RateLimiter(0)

    def test_spaces_out_calls(self):
        import time

        limiter = RateLimiter(rate_per_sec=200)  # 5ms interval
        start = time.monotonic()
        for _ in range(4):
            limiter.wait()
        elapsed = time.monotonic() - start
        assert elapsed >= 0.012  # at least 3 intervals between 4 calls

    def test_thread_safe_under_contention(self):
        import threading

        limiter = RateLimiter(rate_per_sec=10000)
        errors = []

        def hammer():
            try:
                for _ in range(20):
                    limiter.wait()
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=hammer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
