import assert from "node:assert/strict";
import { test } from "node:test";

import { CursorSampler } from "../src/gaze.js";

test("samples track the latest cursor position", async () => {
  const sent: [number, number][][] = [];
  const sampler = new CursorSampler(async (batch) => {
    sent.push(batch);
  }, 3);
  sampler.move(10, 20);
  sampler.sample();
  sampler.move(11, 21);
  sampler.sample();
  sampler.sample(); // still 11,21
  await sampler.flush();
  assert.deepEqual(sent, [[[10, 20], [11, 21], [11, 21]]]);
});

test("no samples before the cursor ever moves", async () => {
  const sent: [number, number][][] = [];
  const sampler = new CursorSampler(async (batch) => {
    sent.push(batch);
  });
  sampler.sample();
  sampler.sample();
  await sampler.flush();
  assert.equal(sent.length, 0);
});

test("failed sends re-queue and the queue stays bounded", async () => {
  let failures = 0;
  const sent: [number, number][][] = [];
  let broken = true;
  const sampler = new CursorSampler(async (batch) => {
    if (broken) {
      failures++;
      throw new Error("disconnected");
    }
    sent.push(batch);
  }, 5, 20);

  sampler.move(1, 1);
  for (let i = 0; i < 100; i++) {
    sampler.sample();
    await sampler.flush();
  }
  assert.ok(failures > 0);
  assert.ok(sampler.pending() <= 20, `queue grew to ${sampler.pending()}`);

  broken = false; // reconnect resumes from the bounded buffer
  while (sampler.pending() > 0) {
    await sampler.flush();
  }
  assert.ok(sent.length > 0);
});
