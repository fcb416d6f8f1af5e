// View state and the pure logic the widgets share. Server responses are the
// only source of truth for anything persisted: the UI never finalizes a
// status the server did not confirm.

import { Cluster, GraphEdge, Lead } from "./types.js";

export interface PendingDecision {
    clusterId: string;
    status: "approved" | "rejected" | "merged";
    mergeInto?: string;
}

export interface ViewState {
    theta: number;
    selectedConcept: string | null;
    industries: string[];
    roles: string[];
    minProb: number;
    pending: Map<string, PendingDecision>;
}

export function initialState(): ViewState {
    return {
        theta: 0.6,
        selectedConcept: null,
        industries: [],
        roles: [],
        minProb: 0.5,
        pending: new Map(),
    };
}

export function clampTheta(value: number): number {
    if (Number.isNaN(value)) return 0;
    return Math.min(1, Math.max(0, value));
}

export function stagePending(state: ViewState, decision: PendingDecision): ViewState {
    const pending = new Map(state.pending);
    pending.set(decision.clusterId, decision);
    return { ...state, pending };
}

export function clearPending(state: ViewState, clusterId: string): ViewState {
    const pending = new Map(state.pending);
    pending.delete(clusterId);
    return { ...state, pending };
}

export function hasPendingDecisions(state: ViewState): boolean {
    return state.pending.size > 0;
}

/** Merge a server-confirmed cluster into the list; no local invention. */
export function applyServerCluster(clusters: Cluster[], confirmed: Cluster): Cluster[] {
    return clusters.map((c) => (c.cluster_id === confirmed.cluster_id ? confirmed : c));
}

export function edgeKey(edge: GraphEdge): string {
    return edge.src < edge.dst ? `${edge.src}--${edge.dst}` : `${edge.dst}--${edge.src}`;
}

export function edgeKeySet(edges: GraphEdge[]): Set<string> {
    return new Set(edges.map(edgeKey));
}

/** True when raising theta only removed edges (the API contract). */
export function isShrinkingEdgeSet(low: GraphEdge[], high: GraphEdge[]): boolean {
    const lowKeys = edgeKeySet(low);
    return high.every((e) => lowKeys.has(edgeKey(e)));
}

/** Defensive client-side cut, mirroring the server rule (weight >= theta). */
export function filterEdges(edges: GraphEdge[], theta: number): GraphEdge[] {
    return edges.filter((e) => e.weight >= theta);
}

/** The API's ranking: score descending, ties by domain. */
export function sortLeads(leads: Lead[]): Lead[] {
    return [...leads].sort((a, b) => (b.score - a.score) || a.domain.localeCompare(b.domain));
}

export function sameOrder(leads: Lead[]): boolean {
    const sorted = sortLeads(leads);
    return leads.every((l, i) => l.domain === sorted[i].domain);
}
