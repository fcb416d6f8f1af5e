// Thin fetch client over the documented service endpoints — nothing else.

import {
    ApiError,
    Cluster,
    CompanyDetail,
    ConceptGraph,
    DecisionRequest,
    LabelSpaces,
    LeadsResponse,
    NeighborsResponse,
} from "./types.js";

async function asJson<T>(resp: Response): Promise<T> {
    let body: unknown = null;
    try {
        body = await resp.json();
    } catch {
        // non-JSON error body
    }
    if (!resp.ok) {
        const detail =
            body && typeof body === "object" && "detail" in body
                ? JSON.stringify((body as { detail: unknown }).detail)
                : resp.statusText;
        throw new ApiError(resp.status, detail);
    }
    return body as T;
}

export function leadsQueryString(
    industries: string[],
    roles: string[],
    minProb: number,
    limit = 50,
): string {
    const params = new URLSearchParams();
    params.set("industries", industries.join(","));
    params.set("roles", roles.join(","));
    params.set("min_prob", String(minProb));
    params.set("limit", String(limit));
    return params.toString();
}

export class ApiClient {
    constructor(readonly baseUrl: string = "") {}

    private url(path: string): string {
        return this.baseUrl + path;
    }

    async conceptGraph(theta: number): Promise<ConceptGraph> {
        const resp = await fetch(this.url(`/concepts/graph?theta=${theta}`));
        return asJson(resp);
    }

    async neighbors(concept: string, theta: number, limit = 10): Promise<NeighborsResponse> {
        const resp = await fetch(
            this.url(`/concepts/${encodeURIComponent(concept)}/neighbors?theta=${theta}&limit=${limit}`),
        );
        return asJson(resp);
    }

    async clusters(): Promise<Cluster[]> {
        const resp = await fetch(this.url("/clusters"));
        return asJson(resp);
    }

    async decide(clusterId: string, decision: DecisionRequest): Promise<Cluster> {
        const resp = await fetch(this.url(`/clusters/${encodeURIComponent(clusterId)}/decision`), {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(decision),
        });
        return asJson(resp);
    }

    async leads(industries: string[], roles: string[], minProb: number, limit = 50): Promise<LeadsResponse> {
        const resp = await fetch(this.url(`/leads?${leadsQueryString(industries, roles, minProb, limit)}`));
        return asJson(resp);
    }

    async company(domain: string): Promise<CompanyDetail> {
        const resp = await fetch(this.url(`/companies/${encodeURIComponent(domain)}`));
        return asJson(resp);
    }

    async labels(): Promise<LabelSpaces> {
        const resp = await fetch(this.url("/labels"));
        return asJson(resp);
    }
}
