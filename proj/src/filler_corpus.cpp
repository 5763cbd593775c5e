// Copyright (C) 2026 The ILRe Authors
// SPDX-License-Identifier: Apache-2.0

#include "ilre/needle.hpp"

namespace ilre {

// Haystack prose for the retrieval task. Written for this project and released
// with it; it only needs to read like ordinary essays.
std::string_view default_filler_corpus() {
    static constexpr std::string_view text = R"(
On Making Things Slowly

Most of the useful things I have built started as something small that I did not expect to keep. A script to rename
files became a tool that a dozen people used every morning. A page of notes turned into a course. The pattern is
common enough that I no longer think of it as luck. Small things are cheap to start, and cheap things get started
more often. If you start enough of them, one will grow.

The difficulty is that small things rarely look important while you are making them. They look like distractions.
There is always a larger project waiting, one with a deadline and a name, and it is easy to feel that every hour
spent elsewhere is an hour stolen from it. But the larger project was also small once. Someone decided it was worth
an afternoon, and then another, and the afternoons added up.

What makes a small project worth continuing? In my experience it is not the quality of the first version. The first
version is almost always bad. What matters is whether anyone, including you, wants to use it again the next day. A
tool you reach for twice is already more valuable than a plan you have admired for a month.

Why Writing Helps

Writing an essay is a way of finding out what you think. You begin with a vague idea and a feeling that it is
true. Then you try to write it down and discover that half of it falls apart. The half that survives is usually
more interesting than the original idea, because it has been tested against the page.

People who do not write often assume that good writers know what they are going to say before they start. Some
do, but most do not. The draft is where the thinking happens. Editing is where you remove the evidence that you
were confused. A finished essay looks inevitable, the way a finished building hides its scaffolding.

This is also why it helps to write about things you are unsure of. If you already understand a topic completely,
the essay will teach you nothing. The best subjects are the ones where you have a strong opinion and a weak
argument. Writing forces the argument to catch up with the opinion, or forces the opinion to change.

The Value of Boring Work

There is a kind of work that nobody brags about: fixing the build, cleaning up old data, answering the same
question for the tenth time. It is easy to treat this as overhead, something to minimize so that the real work can
proceed. But in many organizations the boring work is the real work. It is what keeps everything else standing.

A team that does its boring work well moves faster than a team that does not, even if the second team is more
talented. Problems that would take the second team a week take the first team an hour, because the first team
already knows where everything is and why it is there. Good habits compound in the same way that interest does.

Learning in Public

When you share unfinished work, you invite correction. This can be uncomfortable, but it is the fastest way to
learn. A mistake that stays private can persist for years. A mistake that is published is usually found within
days, often by someone who knows much more than you do and is happy to explain.

The trick is to share work early without pretending it is finished. Label drafts as drafts. Say what you are unsure
about. People are remarkably generous with help when you are honest about what you do not know, and remarkably
harsh when you claim more certainty than you have.

Cities and Gardens

A city is a strange kind of machine. Nobody designed most of it, and yet it works. Streets are laid down for one
reason and used for another. Buildings change owners and purposes many times. The parts that last are the ones that
can adapt, and the ones that fail are often the ones that were planned too precisely for a single use.

Gardens teach a similar lesson on a smaller scale. You can plan the rows and choose the seeds, but the weather and
the soil have their own opinions. A good gardener watches what grows well and plants more of it next year. Over
time the garden comes to reflect the place as much as the plan, and it is better for it.

On Questions

The most useful skill I know is asking good questions. A good question narrows the space of possible answers
without presupposing which answer is right. It is specific enough that someone can actually respond, and open
enough that the response might surprise you. Children are good at this until they learn that questions can make
them look foolish. Many adults spend years relearning what they once did naturally.

When you are stuck, try writing down the question you are trying to answer. Often you will find that you have been
working on a slightly different question from the one that matters. Changing the question is sometimes the whole
solution.
)";
    return text;
}

} // namespace ilre
