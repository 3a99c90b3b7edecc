#pragma once

#include <string_view>
#include <unordered_set>

namespace ovdet {

// Small bundled word lists backing the deterministic caption chunker.
// Stopwords cover articles, pronouns, prepositions, conjunctions and
// numerals written as words; the noun list is a curated set of common
// concrete nouns large enough for the bundled corpora and demos.

inline const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> kStopwords = {
      // articles
      "a", "an", "the",
      // pronouns
      "i", "me", "my", "mine", "you", "your", "yours", "he", "him", "his", "she",
      "her", "hers", "it", "its", "we", "us", "our", "ours", "they", "them",
      "their", "theirs", "this", "that", "these", "those", "who", "whom", "whose",
      "which", "what", "someone", "something", "anyone", "anything", "everyone",
      "everything", "nobody", "nothing", "itself", "himself", "herself",
      // prepositions
      "of", "in", "on", "at", "by", "for", "with", "without", "about", "against",
      "between", "among", "into", "onto", "through", "during", "before", "after",
      "above", "below", "under", "over", "from", "to", "up", "down", "off", "near",
      "beside", "behind", "across", "along", "around", "past", "toward", "towards",
      "upon", "within", "beneath", "amid", "except", "via", "per",
      // conjunctions
      "and", "or", "but", "nor", "so", "yet", "because", "although", "though",
      "while", "whereas", "if", "unless", "until", "since", "when", "whenever",
      "where", "wherever", "as", "than", "whether", "once",
      // numerals as words
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
      "nine", "ten", "eleven", "twelve", "twenty", "thirty", "forty", "fifty",
      "hundred", "thousand", "million", "first", "second", "third", "both",
      "several", "many", "few", "some", "all", "each", "every", "any", "no",
  };
  return kStopwords;
}

inline const std::unordered_set<std::string_view>& noun_set() {
  static const std::unordered_set<std::string_view> kNouns = {
      // people
      "woman", "man", "person", "child", "boy", "girl", "people", "baby", "adult",
      "farmer", "worker", "driver", "rider", "player", "crowd", "family", "giant",
      // animals
      "dog", "cat", "cattle", "cow", "bull", "calf", "horse", "pony", "sheep",
      "lamb", "goat", "pig", "bird", "fish", "salmon", "trout", "butterfly",
      "moth", "insect", "bee", "ant", "spider", "bear", "rabbit", "fox", "deer",
      "lion", "tiger", "elephant", "monkey", "mouse", "duck", "goose", "chicken",
      "whale", "shark", "turtle", "frog", "snake", "lizard", "owl", "eagle",
      "pet", "animal", "herd", "cotswold",
      // vehicles
      "car", "bicycle", "bike", "truck", "bus", "train", "tram", "boat", "ship",
      "ferry", "canoe", "kayak", "airplane", "plane", "jet", "helicopter",
      "motorcycle", "scooter", "vehicle", "wagon", "cart", "tractor", "trailer",
      "sled", "cab", "taxi", "van", "ambulance", "rollerblade", "hoverboard",
      "skateboard", "surfboard", "ski", "snowboard",
      // household objects
      "cup", "mug", "bottle", "glass", "plate", "bowl", "spoon", "fork", "knife",
      "pan", "pot", "kettle", "jar", "basket", "box", "bag", "chair", "table",
      "desk", "sofa", "couch", "bed", "lamp", "light", "candle", "mirror",
      "clock", "watch", "phone", "telephone", "computer", "laptop", "keyboard",
      "screen", "television", "camera", "radio", "speaker", "recorder",
      "toothbrush", "brush", "comb", "towel", "blanket", "pillow", "curtain",
      "carpet", "rug", "shelf", "book", "pen", "pencil", "eraser", "paper",
      "notebook", "scissors", "hammer", "nail", "screwdriver", "wrench", "drill",
      "saw", "ladder", "bucket", "broom", "mop", "umbrella", "handbag", "wallet",
      "key", "coin", "ring", "necklace", "bracelet", "earring", "toy", "doll",
      "ball", "balloon", "kite", "robot", "drone", "stove", "oven", "cooker",
      "hotplate", "refrigerator", "fridge", "microwave", "toaster", "sink",
      "faucet", "machine", "engine", "motor", "wheel", "tire", "tool",
      // clothing
      "hat", "cap", "helmet", "glove", "scarf", "coat", "jacket", "shirt",
      "dress", "skirt", "sock", "shoe", "boot", "sandal", "slipper", "stiletto",
      "heel", "sneaker", "backpack", "suitcase", "uniform",
      // buildings and places
      "house", "home", "building", "tower", "bridge", "footbridge", "road",
      "street", "path", "sidewalk", "wall", "fence", "gate", "door", "window",
      "roof", "gable", "chimney", "stair", "floor", "ceiling", "room", "kitchen",
      "bathroom", "bedroom", "office", "library", "school", "church", "cathedral",
      "temple", "pagoda", "castle", "palace", "hotel", "restaurant", "cafe",
      "shop", "store", "market", "mall", "bank", "hospital", "station", "airport",
      "harbor", "port", "factory", "brewery", "barn", "shed", "garage", "cabin",
      "hut", "tent", "booth", "courtyard", "garden", "park", "playground",
      "fountain", "statue", "monument", "museum", "city", "town", "village",
      "farm", "yard", "pool", "fresco", "pottery",
      // plants and food
      "tree", "bush", "shrub", "flower", "wildflower", "grass", "leaf", "branch",
      "root", "seed", "pod", "fruit", "apple", "pear", "orange", "banana",
      "grape", "lemon", "peach", "cherry", "berry", "strawberry", "melon",
      "watermelon", "pineapple", "mango", "coconut", "tomato", "potato", "taro",
      "carrot", "onion", "pepper", "cabbage", "lettuce", "mushroom", "corn",
      "wheat", "rice", "bread", "cake", "cookie", "pie", "pizza", "sandwich",
      "burger", "cheese", "butter", "egg", "milk", "coffee", "tea", "juice",
      "water", "wine", "beer", "soup", "salad", "meat", "beef", "pork", "bacon",
      "sausage", "pasta", "noodle", "chip", "plant",
      // nature
      "mountain", "hill", "valley", "river", "lake", "pond", "sea", "ocean",
      "beach", "shore", "island", "desert", "forest", "wood", "field", "meadow",
      "cliff", "cave", "rock", "stone", "boulder", "sand", "soil", "mud", "snow",
      "ice", "rain", "cloud", "sky", "sun", "moon", "star", "wind", "storm",
      "rainbow", "waterfall", "basin", "fire", "smoke",
      // shapes and marks
      "circle", "square", "triangle", "rectangle", "diamond", "cross", "oval",
      "ellipse", "hexagon", "pentagon", "shape", "line", "stripe", "spot", "dot",
      "pattern", "disc", "disk", "band", "bar", "grid", "arrow", "plus",
      // street furniture
      "bench", "sign", "signal", "pole", "post", "lamppost", "flag", "banner",
      "streetlight",
  };
  return kNouns;
}

}  // namespace ovdet
