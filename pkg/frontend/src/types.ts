// JSON contracts of the segmentation service.

export interface GraphEdge {
    src: string;
    dst: string;
    weight: number;
}

export interface ConceptGraph {
    theta: number;
    nodes: string[];
    edges: GraphEdge[];
}

export interface Neighbor {
    concept: string;
    weight: number;
}

export interface NeighborsResponse {
    concept: string;
    neighbors: Neighbor[];
}

export type ClusterStatus = "proposed" | "approved" | "rejected" | "merged";

export interface Cluster {
    cluster_id: string;
    members: string[];
    status: ClusterStatus;
    merged_into: string | null;
}

export interface Lead {
    domain: string;
    score: number;
    probs: Record<string, number>;
}

export interface LeadsResponse {
    industries: string[];
    roles: string[];
    min_prob: number;
    leads: Lead[];
}

export interface CompanyDetail {
    domain: string;
    pages: string[];
    labels: Record<string, string[]>;
    predictions: Record<string, Record<string, number>>;
}

export interface LabelSpaces {
    industry: string[];
    role: string[];
}

export interface DecisionRequest {
    status: "approved" | "rejected" | "merged";
    merge_into?: string | null;
    actor?: string;
}

export class ApiError extends Error {
    constructor(readonly status: number, readonly detail: string) {
        super(`HTTP ${status}: ${detail}`);
    }
}
