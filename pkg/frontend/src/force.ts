// Minimal force-directed layout: spring edges, pairwise repulsion, mild
// centering. Deterministic given the node order (seeded ring start).

import { GraphEdge } from "./types.js";

export interface LayoutNode {
    id: string;
    x: number;
    y: number;
    vx: number;
    vy: number;
}

export interface LayoutOptions {
    width: number;
    height: number;
    iterations: number;
    springLength: number;
    springStrength: number;
    repulsion: number;
    centering: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
    width: 800,
    height: 600,
    iterations: 150,
    springLength: 120,
    springStrength: 0.02,
    repulsion: 30000,
    centering: 0.002,
};

export function ringLayout(ids: string[], width: number, height: number): LayoutNode[] {
    const cx = width / 2;
    const cy = height / 2;
    const radius = Math.min(width, height) * 0.38;
    return ids.map((id, i) => {
        const angle = (2 * Math.PI * i) / Math.max(1, ids.length);
        return { id, x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle), vx: 0, vy: 0 };
    });
}

export function runLayout(ids: string[], edges: GraphEdge[], opts: LayoutOptions = DEFAULT_LAYOUT): LayoutNode[] {
    const nodes = ringLayout(ids, opts.width, opts.height);
    const index = new Map(nodes.map((n, i) => [n.id, i]));
    const cx = opts.width / 2;
    const cy = opts.height / 2;

    for (let it = 0; it < opts.iterations; it++) {
        for (let i = 0; i < nodes.length; i++) {
            for (let j = i + 1; j < nodes.length; j++) {
                const a = nodes[i];
                const b = nodes[j];
                let dx = a.x - b.x;
                let dy = a.y - b.y;
                let d2 = dx * dx + dy * dy;
                if (d2 < 1) d2 = 1;
                const f = opts.repulsion / d2;
                const d = Math.sqrt(d2);
                dx /= d;
                dy /= d;
                a.vx += dx * f;
                a.vy += dy * f;
                b.vx -= dx * f;
                b.vy -= dy * f;
            }
        }
        for (const e of edges) {
            const ia = index.get(e.src);
            const ib = index.get(e.dst);
            if (ia === undefined || ib === undefined) continue;
            const a = nodes[ia];
            const b = nodes[ib];
            const dx = b.x - a.x;
            const dy = b.y - a.y;
            const d = Math.max(1, Math.sqrt(dx * dx + dy * dy));
            const stretch = (d - opts.springLength) * opts.springStrength * (0.5 + e.weight / 2);
            a.vx += (dx / d) * stretch;
            a.vy += (dy / d) * stretch;
            b.vx -= (dx / d) * stretch;
            b.vy -= (dy / d) * stretch;
        }
        for (const n of nodes) {
            n.vx += (cx - n.x) * opts.centering;
            n.vy += (cy - n.y) * opts.centering;
            n.x += n.vx;
            n.y += n.vy;
            n.vx *= 0.6;
            n.vy *= 0.6;
            n.x = Math.min(opts.width - 20, Math.max(20, n.x));
            n.y = Math.min(opts.height - 20, Math.max(20, n.y));
        }
    }
    return nodes;
}
