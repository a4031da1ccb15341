// Minimal mocked server: routes POSTs to canned handlers, with an
// optional per-call delay so in-flight behaviour can be exercised.

import type { FetchLike } from '../src/api';

export interface MockRoute {
  status: number;
  body: unknown;
  delayMs?: number;
}

export class MockServer {
  calls: { path: string; body: unknown }[] = [];
  private routes = new Map<string, MockRoute[]>();

  on(path: string, route: MockRoute): void {
    const queue = this.routes.get(path) ?? [];
    queue.push(route);
    this.routes.set(path, queue);
  }

  fetch: FetchLike = async (input, init) => {
    const path = new URL(input, 'http://mock').pathname;
    this.calls.push({
      path,
      body: init?.body ? JSON.parse(init.body as string) : null,
    });
    const queue = this.routes.get(path);
    if (!queue || queue.length === 0) {
      throw new Error(`no mock route for ${path}`);
    }
    const route = queue.length > 1 ? queue.shift()! : queue[0];
    if (route.delayMs) {
      await new Promise((resolve) => setTimeout(resolve, route.delayMs));
    }
    return new Response(JSON.stringify(route.body), {
      status: route.status,
      headers: { 'content-type': 'application/json' },
    });
  };
}

export const askOk = (answer: string, hits: unknown[] = []) => ({
  status: 200,
  body: {
    answer,
    lang: 'en',
    hits,
    disclaimer: 'This is preliminary information, not a medical diagnosis.',
  },
});
